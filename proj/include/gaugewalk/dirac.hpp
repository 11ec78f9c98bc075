#pragma once

// Continuum Dirac reference on a periodic grid: i d_t psi = H psi with
//   H = -i gamma0 gamma^i d_i + m gamma0 + q A^0 - q gamma0 gamma^i A^i
// (contravariant A^i), spectral spatial derivatives and classical RK4 in time.
//
// Stability: dt * (k_max sqrt(dim) + |m| + |q| max|A|) must stay below 2.5,
// inside the imaginary-axis stability interval of RK4 (2 sqrt 2).

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaugewalk/errors.hpp"
#include "gaugewalk/gauge.hpp"
#include "gaugewalk/lattice.hpp"
#include "gaugewalk/walk.hpp"

namespace gaugewalk {

/// gamma^0..gamma^dim. 1D: sigma1, -i sigma2. 2D: sigma1, -i sigma3, -i sigma2.
struct GammaSet {
    int dimension = 1;
    std::array<Mat2, 3> gamma;

    /// gamma0 gamma^mu, the sandwich matrix of the current component mu.
    Mat2 current_matrix(int mu) const { return gamma[0] * gamma[mu]; }
};

inline GammaSet gamma_set(int dimension) {
    if (dimension != 1 && dimension != 2) throw std::invalid_argument("dimension must be 1 or 2");
    const Complex i(0.0, 1.0);
    Mat2 s1, s2, s3;
    s1 << 0, 1, 1, 0;
    s2 << 0, -i, i, 0;
    s3 << 1, 0, 0, -1;
    GammaSet g;
    g.dimension = dimension;
    g.gamma[0] = s1;
    if (dimension == 1) {
        g.gamma[1] = -i * s2;
        g.gamma[2] = Mat2::Zero();
    } else {
        g.gamma[1] = -i * s3;
        g.gamma[2] = -i * s2;
    }
    return g;
}

/// max |{gamma^mu, gamma^nu} - 2 eta^{mu nu}| with signature (+,-) or (+,-,-).
inline double anticommutator_deviation(const GammaSet& g) {
    double worst = 0.0;
    for (int mu = 0; mu <= g.dimension; ++mu)
        for (int nu = 0; nu <= g.dimension; ++nu) {
            const double eta = mu != nu ? 0.0 : mu == 0 ? 1.0 : -1.0;
            const Mat2 ac = g.gamma[mu] * g.gamma[nu] + g.gamma[nu] * g.gamma[mu];
            worst = std::max(worst, (ac - 2.0 * eta * Mat2::Identity()).cwiseAbs().maxCoeff());
        }
    return worst;
}

struct DiracConfig {
    int dimension = 1;
    double mass = 0.0;
    double charge = 1.0;
    std::size_t nx = 64;
    std::size_t ny = 1;
    double length_x = 1.0;
    double length_y = 1.0;
    double dt = 1e-3;
    PotentialSpec potential = PotentialSpec::zero();
};

/// Two-component field on the grid, x fastest. Normalized with the plain sum of |psi|^2.
struct SpinorField {
    std::size_t nx = 0;
    std::size_t ny = 1;
    double length_x = 1.0;
    double length_y = 1.0;
    double t = 0.0;
    std::vector<Complex> c1;
    std::vector<Complex> c2;

    SpinorField() = default;
    SpinorField(std::size_t nx_, std::size_t ny_, double lx, double ly)
        : nx(nx_), ny(ny_), length_x(lx), length_y(ly), c1(nx_ * ny_), c2(nx_ * ny_) {}

    std::size_t points() const noexcept { return nx * ny; }
    double dx() const noexcept { return length_x / static_cast<double>(nx); }
    double dy() const noexcept { return length_y / static_cast<double>(ny); }
    double x(std::size_t k) const noexcept { return static_cast<double>(k % nx) * dx(); }
    double y(std::size_t k) const noexcept { return static_cast<double>(k / nx) * dy(); }
};

inline double spinor_norm(const SpinorField& f) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.points(); ++k) s += std::norm(f.c1[k]) + std::norm(f.c2[k]);
    return std::sqrt(s);
}

inline void normalize(SpinorField& f) {
    const double n = spinor_norm(f);
    if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero spinor field");
    for (auto& v : f.c1) v /= n;
    for (auto& v : f.c2) v /= n;
}

inline SpinorField spinor_field(const DiracConfig& cfg) {
    return SpinorField(cfg.nx, cfg.dimension == 1 ? 1 : cfg.ny, cfg.length_x, cfg.dimension == 1 ? 1.0 : cfg.length_y);
}

inline SpinorField gaussian_spinor_field(const DiracConfig& cfg, const GaussianPacket& gp) {
    SpinorField f = spinor_field(cfg);
    for (std::size_t k = 0; k < f.points(); ++k) {
        const auto [a, b] = gaussian_spinor(gp, f.x(k), f.y(k), f.length_x, f.length_y, cfg.dimension);
        f.c1[k] = a;
        f.c2[k] = b;
    }
    normalize(f);
    return f;
}

/// Owns FFTW plans for one grid shape. Not copyable; one instance per thread.
class DiracSolver {
public:
    explicit DiracSolver(DiracConfig cfg) : cfg_(std::move(cfg)), gamma_(gamma_set(cfg_.dimension)) {
        if (cfg_.dimension == 1) cfg_.ny = 1;
        if (cfg_.nx < 2 || (cfg_.dimension == 2 && cfg_.ny < 2)) throw std::invalid_argument("grid needs at least 2 points per axis");
        if (!(cfg_.dt > 0.0) || !std::isfinite(cfg_.dt)) throw std::invalid_argument("dt must be positive and finite");
        if (!(cfg_.length_x > 0.0) || !(cfg_.length_y > 0.0)) throw std::invalid_argument("box lengths must be positive");
        n_ = cfg_.nx * cfg_.ny;
        buf_a_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_));
        buf_b_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_));
        if (cfg_.dimension == 1) {
            fwd_ = fftw_plan_dft_1d(static_cast<int>(cfg_.nx), buf_a_, buf_b_, FFTW_FORWARD, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_1d(static_cast<int>(cfg_.nx), buf_b_, buf_a_, FFTW_BACKWARD, FFTW_ESTIMATE);
        } else {
            fwd_ = fftw_plan_dft_2d(static_cast<int>(cfg_.ny), static_cast<int>(cfg_.nx), buf_a_, buf_b_, FFTW_FORWARD,
                                    FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_2d(static_cast<int>(cfg_.ny), static_cast<int>(cfg_.nx), buf_b_, buf_a_,
                                    FFTW_BACKWARD, FFTW_ESTIMATE);
        }
        kx_ = wavenumbers(cfg_.nx, cfg_.length_x);
        ky_ = cfg_.dimension == 2 ? wavenumbers(cfg_.ny, cfg_.length_y) : std::vector<double>(1, 0.0);
        ref_ = spinor_field(cfg_);
        for (int i = 1; i <= cfg_.dimension; ++i) alpha_[i - 1] = gamma_.current_matrix(i);
        check_stability();
    }

    DiracSolver(const DiracSolver&) = delete;
    DiracSolver& operator=(const DiracSolver&) = delete;

    ~DiracSolver() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_a_);
        fftw_free(buf_b_);
    }

    const DiracConfig& config() const noexcept { return cfg_; }
    const GammaSet& gammas() const noexcept { return gamma_; }

    /// Largest admissible dt for this grid and potential (sampled at t=0).
    double stability_limit() const {
        const double kmax = std::max(kmax_of(cfg_.nx, cfg_.length_x), cfg_.dimension == 2 ? kmax_of(cfg_.ny, cfg_.length_y) : 0.0);
        const Potentials& p = potentials_at(0.0);
        double amax = 0.0;
        for (const auto& comp : p.a)
            for (double v : comp) amax = std::max(amax, std::abs(v));
        const double bound = kmax * std::sqrt(static_cast<double>(cfg_.dimension)) + std::abs(cfg_.mass) +
                             std::abs(cfg_.charge) * amax * static_cast<double>(cfg_.dimension + 1);
        return 2.5 / bound;
    }

    /// Spectral derivative of a scalar grid function along axis 1 (x) or 2 (y).
    std::vector<Complex> derivative(const std::vector<Complex>& f, int axis) const {
        if (f.size() != n_) throw std::invalid_argument("field does not match the grid");
        std::vector<Complex> out(n_);
        spectral(f, out, [&](std::size_t kx, std::size_t ky) { return Complex(0.0, axis == 1 ? kx_[kx] : ky_[ky]); });
        return out;
    }

    /// out = H(t) psi.
    void apply_hamiltonian(const SpinorField& psi, double t, SpinorField& out) const {
        const Potentials& p = potentials_at(t);
        out = psi;
        std::vector<Complex>& o1 = out.c1;
        std::vector<Complex>& o2 = out.c2;
        std::fill(o1.begin(), o1.end(), Complex(0.0));
        std::fill(o2.begin(), o2.end(), Complex(0.0));
        // kinetic part -i sum_i alpha_i d_i, with alpha_i = gamma0 gamma^i, applied in Fourier space
        std::vector<Complex> h1(n_), h2(n_), k1(n_), k2(n_);
        forward(psi.c1, h1);
        forward(psi.c2, h2);
        for (std::size_t iy = 0; iy < cfg_.ny; ++iy)
            for (std::size_t ix = 0; ix < cfg_.nx; ++ix) {
                const std::size_t k = ix + cfg_.nx * iy;
                Complex a = 0.0, b = 0.0;
                for (int i = 0; i < cfg_.dimension; ++i) {
                    const double kk = i == 0 ? kx_[ix] : ky_[iy];
                    // -i * (i k) = k
                    a += kk * (alpha_[i](0, 0) * h1[k] + alpha_[i](0, 1) * h2[k]);
                    b += kk * (alpha_[i](1, 0) * h1[k] + alpha_[i](1, 1) * h2[k]);
                }
                k1[k] = a;
                k2[k] = b;
            }
        backward(k1, o1);
        backward(k2, o2);
        const Mat2& g0 = gamma_.gamma[0];
        const double m = cfg_.mass, q = cfg_.charge;
        for (std::size_t k = 0; k < n_; ++k) {
            Mat2 local = m * g0 + q * p.a[0][k] * Mat2::Identity();
            for (int i = 0; i < cfg_.dimension; ++i) local -= q * p.a[i + 1][k] * alpha_[i];
            o1[k] += local(0, 0) * psi.c1[k] + local(0, 1) * psi.c2[k];
            o2[k] += local(1, 0) * psi.c1[k] + local(1, 1) * psi.c2[k];
        }
    }

    /// d_t psi = -i H psi.
    void time_derivative(const SpinorField& psi, double t, SpinorField& out) const {
        apply_hamiltonian(psi, t, out);
        const Complex mi(0.0, -1.0);
        for (auto& v : out.c1) v *= mi;
        for (auto& v : out.c2) v *= mi;
    }

    /// One RK4 step of size h (defaults to the configured dt).
    void step(SpinorField& psi, double h = 0.0) const {
        if (h == 0.0) h = cfg_.dt;
        require_shape(psi);
        const double t = psi.t;
        SpinorField k1, k2, k3, k4, tmp;
        time_derivative(psi, t, k1);
        axpy(psi, 0.5 * h, k1, tmp);
        time_derivative(tmp, t + 0.5 * h, k2);
        axpy(psi, 0.5 * h, k2, tmp);
        time_derivative(tmp, t + 0.5 * h, k3);
        axpy(psi, h, k3, tmp);
        time_derivative(tmp, t + h, k4);
        for (std::size_t k = 0; k < n_; ++k) {
            psi.c1[k] += h / 6.0 * (k1.c1[k] + 2.0 * k2.c1[k] + 2.0 * k3.c1[k] + k4.c1[k]);
            psi.c2[k] += h / 6.0 * (k1.c2[k] + 2.0 * k2.c2[k] + 2.0 * k3.c2[k] + k4.c2[k]);
        }
        psi.t = t + h;
    }

    /// Advances psi to psi.t + duration with equal steps no larger than dt.
    /// Throws InstabilityError once the norm drifts by more than 1e-6.
    void evolve(SpinorField& psi, double duration) const {
        if (duration < 0.0) throw std::invalid_argument("duration must be non-negative");
        if (duration == 0.0) return;
        const double n0 = spinor_norm(psi);
        const auto steps = static_cast<std::size_t>(std::ceil(duration / cfg_.dt - 1e-9));
        const double h = duration / static_cast<double>(steps);
        const double t0 = psi.t;
        for (std::size_t s = 0; s < steps; ++s) {
            step(psi, h);
            const double drift = std::abs(spinor_norm(psi) - n0);
            if (!(drift <= 1e-6))
                throw InstabilityError("reference norm drifted by " + std::to_string(drift) + " at t=" +
                                       std::to_string(psi.t) + " (step " + std::to_string(s + 1) + ", h=" +
                                       std::to_string(h) + ")");
        }
        psi.t = t0 + duration;
    }

private:
    struct Potentials {
        double t = 0.0;
        std::array<std::vector<double>, 3> a;
    };

    static std::vector<double> wavenumbers(std::size_t n, double length) {
        std::vector<double> k(n);
        const long nn = static_cast<long>(n);
        for (long i = 0; i < nn; ++i) {
            long m = i <= nn / 2 ? i : i - nn;
            if (nn % 2 == 0 && i == nn / 2) m = 0;  // drop the unpaired Nyquist mode
            k[static_cast<std::size_t>(i)] = 2.0 * kPi * static_cast<double>(m) / length;
        }
        return k;
    }

    static double kmax_of(std::size_t n, double length) {
        return 2.0 * kPi * static_cast<double>(n / 2) / length;
    }

    void check_stability() const {
        const double limit = stability_limit();
        if (cfg_.dt > limit)
            throw InstabilityError("dt=" + std::to_string(cfg_.dt) + " exceeds the RK4 stability bound " +
                                   std::to_string(limit) + " for this grid");
    }

    void require_shape(const SpinorField& f) const {
        if (f.nx != cfg_.nx || f.ny != cfg_.ny || f.c1.size() != n_ || f.c2.size() != n_)
            throw std::invalid_argument("spinor field does not match the solver grid");
    }

    void axpy(const SpinorField& x, double a, const SpinorField& k, SpinorField& out) const {
        out = x;
        for (std::size_t i = 0; i < n_; ++i) {
            out.c1[i] += a * k.c1[i];
            out.c2[i] += a * k.c2[i];
        }
    }

    void forward(const std::vector<Complex>& in, std::vector<Complex>& out) const {
        std::copy(in.begin(), in.end(), reinterpret_cast<Complex*>(buf_a_));
        fftw_execute(fwd_);
        const Complex* b = reinterpret_cast<const Complex*>(buf_b_);
        out.assign(b, b + n_);
    }

    void backward(const std::vector<Complex>& in, std::vector<Complex>& out) const {
        std::copy(in.begin(), in.end(), reinterpret_cast<Complex*>(buf_b_));
        fftw_execute(bwd_);
        const Complex* a = reinterpret_cast<const Complex*>(buf_a_);
        const double scale = 1.0 / static_cast<double>(n_);
        out.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = a[i] * scale;
    }

    template <class Multiplier>
    void spectral(const std::vector<Complex>& in, std::vector<Complex>& out, Multiplier mult) const {
        std::vector<Complex> h(n_);
        forward(in, h);
        for (std::size_t iy = 0; iy < cfg_.ny; ++iy)
            for (std::size_t ix = 0; ix < cfg_.nx; ++ix) h[ix + cfg_.nx * iy] *= mult(ix, iy);
        backward(h, out);
    }

    const Potentials& potentials_at(double t) const {
        const double key = cfg_.potential.time_independent ? 0.0 : t;
        for (const auto& c : cache_)
            if (c.t == key) return c;
        Potentials p;
        p.t = key;
        const std::array<const ScalarFunction*, 3> fs{&cfg_.potential.a0, &cfg_.potential.a1, &cfg_.potential.a2};
        for (int c = 0; c < 3; ++c) {
            p.a[c].assign(n_, 0.0);
            if (c > cfg_.dimension || !*fs[c]) continue;
            for (std::size_t k = 0; k < n_; ++k) {
                const double v = (*fs[c])(key, ref_.x(k), ref_.y(k));
                if (!std::isfinite(v)) throw SamplingError(0, k, "non-finite potential in the reference solver");
                p.a[c][k] = v;
            }
        }
        if (cache_.size() >= 3) cache_.erase(cache_.begin());
        cache_.push_back(std::move(p));
        return cache_.back();
    }

    DiracConfig cfg_;
    GammaSet gamma_;
    std::array<Mat2, 2> alpha_{Mat2::Zero(), Mat2::Zero()};
    std::size_t n_ = 0;
    fftw_complex* buf_a_ = nullptr;
    fftw_complex* buf_b_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
    std::vector<double> kx_, ky_;
    SpinorField ref_;
    mutable std::vector<Potentials> cache_;
};

/// j^mu = psi^dagger gamma0 gamma^mu psi, component mu = 0..dim.
struct ContinuumCurrent {
    std::vector<double> j0, jx, jy;
};

inline ContinuumCurrent continuum_current(const SpinorField& psi, const GammaSet& g) {
    ContinuumCurrent out;
    std::array<std::vector<double>*, 3> comps{&out.j0, &out.jx, &out.jy};
    for (int mu = 0; mu <= 2; ++mu) {
        comps[mu]->assign(psi.points(), 0.0);
        if (mu > g.dimension) continue;
        const Mat2 s = g.current_matrix(mu);
        for (std::size_t k = 0; k < psi.points(); ++k) {
            const Complex a = psi.c1[k], b = psi.c2[k];
            const Complex v = std::conj(a) * (s(0, 0) * a + s(0, 1) * b) + std::conj(b) * (s(1, 0) * a + s(1, 1) * b);
            (*comps[mu])[k] = v.real();
        }
    }
    return out;
}

/// Pointwise d_mu j^mu, with d_t j0 = 2 Re(psi^dagger d_t psi) and spectral spatial derivatives.
inline std::vector<double> current_divergence(const DiracSolver& solver, const SpinorField& psi) {
    const ContinuumCurrent j = continuum_current(psi, solver.gammas());
    SpinorField dpsi;
    solver.time_derivative(psi, psi.t, dpsi);
    const auto as_complex = [](const std::vector<double>& v) { return std::vector<Complex>(v.begin(), v.end()); };
    const auto djx = solver.derivative(as_complex(j.jx), 1);
    std::vector<Complex> djy(psi.points(), 0.0);
    if (solver.config().dimension == 2) djy = solver.derivative(as_complex(j.jy), 2);
    std::vector<double> out(psi.points());
    for (std::size_t k = 0; k < psi.points(); ++k) {
        const double dt_j0 = 2.0 * (std::conj(psi.c1[k]) * dpsi.c1[k] + std::conj(psi.c2[k]) * dpsi.c2[k]).real();
        out[k] = dt_j0 + djx[k].real() + djy[k].real();
    }
    return out;
}

struct ConvergenceSetup {
    int dimension = 1;
    double length = 4.0;  // periodic box edge, same on both axes in 2D
    double mass = 1.0;
    double charge = 1.0;
    PotentialSpec potential = PotentialSpec::zero();
    GaussianPacket packet;
    double final_time = 1.0;
    std::vector<double> eps_list;    // descending
    std::size_t reference_points = 0;  // per axis; 0 picks the finest walk grid
    double reference_dt = 0.0;         // 0 picks half the stability bound
};

struct ConvergenceRow {
    double eps = 0.0;
    std::size_t sites_per_axis = 0;
    double l2_error = 0.0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double slope = 0.0;
    bool monotone = true;
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

namespace detail {

inline std::size_t grid_points(double length, double eps) {
    const double n = length / eps;
    const double r = std::round(n);
    if (r < 2.0 || std::abs(n - r) > 1e-9 * n) throw std::invalid_argument("box length must be a multiple of every eps");
    return static_cast<std::size_t>(r);
}

inline std::size_t step_count(double final_time, double per_step) {
    const double n = final_time / per_step;
    const double r = std::round(n);
    if (std::abs(n - r) > 1e-9 * std::max(1.0, n)) throw std::invalid_argument("final time must be a multiple of the time step");
    return static_cast<std::size_t>(r);
}

// Walk at the continuum-family angles, run to final_time.
inline WalkerState run_walk(const ConvergenceSetup& cs, double eps) {
    const std::size_t n = grid_points(cs.length, eps);
    if (cs.dimension == 1) {
        const LatticeGeom g = LatticeGeom::line(n, eps);
        const std::size_t steps = step_count(cs.final_time, eps);
        PotentialSpec pot = cs.potential;
        pot.charge = cs.charge;
        const GaugePhases ph = sample_phases(pot, g, steps);
        const auto params = WalkParams1D::continuum_family(cs.mass, cs.charge, eps);
        return evolve(gaussian_packet(g, cs.packet), steps, ph, params, {}, false).states.back();
    }
    const LatticeGeom g = LatticeGeom::plane(n, n, eps);
    const std::size_t substeps = 2 * step_count(cs.final_time, eps);
    PotentialSpec pot = cs.potential;
    pot.charge = cs.charge;
    const GaugePhases ph = sample_phases(pot, g, substeps);
    const auto params = WalkParams2D::continuum_family(cs.mass, cs.charge, eps);
    return evolve(gaussian_packet(g, cs.packet), substeps, ph, params, {}, false).states.back();
}

}  // namespace detail

/// Walk-vs-reference L2 errors at final_time for each eps. The reference runs
/// once on the finest grid; each walk is compared with its stride subsample,
/// renormalized, under the identity map (R, L) -> (component 1, component 2).
inline ConvergenceResult convergence_study(const ConvergenceSetup& cs) {
    if (cs.eps_list.size() < 2) throw std::invalid_argument("convergence study needs at least two eps values");
    for (std::size_t i = 1; i < cs.eps_list.size(); ++i)
        if (!(cs.eps_list[i] < cs.eps_list[i - 1])) throw std::invalid_argument("eps list must be strictly descending");
    std::vector<std::size_t> sizes;
    for (double e : cs.eps_list) sizes.push_back(detail::grid_points(cs.length, e));
    const std::size_t nref = cs.reference_points ? cs.reference_points : sizes.back();
    for (std::size_t n : sizes)
        if (nref % n != 0) throw std::invalid_argument("reference grid must be a multiple of every walk grid");

    DiracConfig dc;
    dc.dimension = cs.dimension;
    dc.mass = cs.mass;
    dc.charge = cs.charge;
    dc.nx = nref;
    dc.ny = cs.dimension == 2 ? nref : 1;
    dc.length_x = cs.length;
    dc.length_y = cs.length;
    dc.potential = cs.potential;
    dc.dt = 1.0;
    if (cs.reference_dt > 0.0) {
        dc.dt = cs.reference_dt;
    } else {
        dc.dt = 1e-300;  // probe the bound without tripping the constructor check
        dc.dt = 0.5 * DiracSolver(dc).stability_limit();
    }
    const DiracSolver solver(dc);
    SpinorField ref = gaussian_spinor_field(dc, cs.packet);
    solver.evolve(ref, cs.final_time);

    ConvergenceResult result;
    std::vector<double> eps, err;
    for (std::size_t i = 0; i < cs.eps_list.size(); ++i) {
        const WalkerState w = detail::run_walk(cs, cs.eps_list[i]);
        const std::size_t n = sizes[i];
        const std::size_t stride = nref / n;
        const std::size_t ny = cs.dimension == 2 ? n : 1;
        std::vector<Complex> sub(2 * n * ny);
        double norm2 = 0.0;
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < n; ++ix) {
                const std::size_t k = ix * stride + nref * (iy * stride);
                const std::size_t site = ix + n * iy;
                sub[2 * site] = ref.c1[k];
                sub[2 * site + 1] = ref.c2[k];
                norm2 += std::norm(ref.c1[k]) + std::norm(ref.c2[k]);
            }
        const double scale = 1.0 / std::sqrt(norm2);
        double e2 = 0.0;
        const auto amp = w.amplitudes();
        for (std::size_t k = 0; k < sub.size(); ++k) e2 += std::norm(amp[k] - scale * sub[k]);
        result.rows.push_back({cs.eps_list[i], n, std::sqrt(e2)});
        eps.push_back(cs.eps_list[i]);
        err.push_back(std::sqrt(e2));
        if (i > 0 && !(err[i] < err[i - 1])) result.monotone = false;
    }
    result.slope = loglog_slope(eps, err);
    return result;
}

}  // namespace gaugewalk
