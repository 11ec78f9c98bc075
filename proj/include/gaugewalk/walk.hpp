#pragma once

// Gauged one-dimensional step, alternating two-dimensional substeps, and
// trajectory evolution.
//
// Time indices: in 1D, step j -> j+1 uses the phase slice with base index j.
// In 2D, a state at even j is followed by an x-substep and a state at odd j by
// a y-substep; the two-substep step maps even j to j+2 (one eps of physical time).

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaugewalk/errors.hpp"
#include "gaugewalk/gauge.hpp"
#include "gaugewalk/lattice.hpp"

namespace gaugewalk {

struct WalkParams1D {
    double theta = 0.0;
    double mass = 0.0;
    double charge = 1.0;
    double eps_m = 1.0;

    /// theta = -2 eps_m m.
    static WalkParams1D continuum_family(double mass, double charge, double eps_m) {
        return WalkParams1D{-2.0 * eps_m * mass, mass, charge, eps_m};
    }
};

struct WalkParams2D {
    double theta1 = kPi / 2;
    double theta2 = -kPi / 2;
    double mass = 0.0;
    double charge = 1.0;
    double eps_m = 1.0;

    /// theta^1 = pi/2 - eps_m m, theta^2 = -pi/2 - eps_m m.
    static WalkParams2D continuum_family(double mass, double charge, double eps_m) {
        return WalkParams2D{kPi / 2 - eps_m * mass, -kPi / 2 - eps_m * mass, mass, charge, eps_m};
    }
};

/// S = T e^{i beta_-} Lambda_R + e^{-i beta_+} T^dagger Lambda_L along `axis`:
///   out_R(p) = e^{i beta_-(p-1)} in_R(p-1),   out_L(p) = e^{-i beta_+(p)} in_L(p+1).
inline WalkerState gauged_shift(const WalkerState& in, std::span<const double> beta_minus,
                                std::span<const double> beta_plus, Axis axis) {
    const LatticeGeom& g = in.geom();
    if (axis == Axis::T || !g.has_axis(axis)) throw std::invalid_argument("shift axis not present on this lattice");
    if (beta_minus.size() != g.sites() || beta_plus.size() != g.sites())
        throw std::invalid_argument("phase fields do not match the lattice");
    WalkerState out(g, in.time_index());
    auto src = in.amplitudes();
    auto dst = out.amplitudes();
    for (std::size_t p = 0; p < g.sites(); ++p) {
        const std::size_t from_r = g.neighbor(p, axis, -1);
        const std::size_t from_l = g.neighbor(p, axis, +1);
        dst[2 * p] = std::polar(1.0, beta_minus[from_r]) * src[2 * from_r];
        dst[2 * p + 1] = std::polar(1.0, -beta_plus[p]) * src[2 * from_l + 1];
    }
    return out;
}

/// Phases of one (sub)step together with the label they carry (base index + 1).
struct PhaseSlice {
    std::span<const double> alpha;
    std::span<const double> xi;
    double alpha_weight = 1.0;
    long label = 0;
};

inline PhaseSlice phase_slice(const GaugePhases& phases, long base_index, Axis axis) {
    const auto s = phases.slice_for(base_index);
    if (!s)
        throw ContractError("phase schedule has no slice for the step leaving j=" + std::to_string(base_index));
    if (axis == Axis::Y && phases.xi2.empty()) throw std::invalid_argument("schedule has no y phases");
    return PhaseSlice{phases.alpha.slice(*s), phases.xi(axis).slice(*s), phases.alpha_weight(), base_index + 1};
}

namespace detail {

// Coin then gauged shift in one pass over the output sites.
inline WalkerState coin_and_shift(const WalkerState& in, const CoinOperator& coin, const PhaseSlice& ph,
                                  Axis axis) {
    const LatticeGeom& g = in.geom();
    if (ph.alpha.size() != g.sites() || ph.xi.size() != g.sites())
        throw std::invalid_argument("phase slice does not match the lattice");
    const Mat2& c = coin.matrix();
    const Complex c00 = c(0, 0), c01 = c(0, 1), c10 = c(1, 0), c11 = c(1, 1);
    const double w = ph.alpha_weight;
    WalkerState out(g, in.time_index() + 1);
    auto src = in.amplitudes();
    auto dst = out.amplitudes();
    for (std::size_t p = 0; p < g.sites(); ++p) {
        const std::size_t r = g.neighbor(p, axis, -1);
        const std::size_t l = g.neighbor(p, axis, +1);
        const Complex up = c00 * src[2 * r] + c01 * src[2 * r + 1];
        const Complex down = c10 * src[2 * l] + c11 * src[2 * l + 1];
        const double beta_minus = ph.xi[r] - w * ph.alpha[r];
        const double beta_plus = ph.xi[p] + w * ph.alpha[p];
        dst[2 * p] = std::polar(1.0, beta_minus) * up;
        dst[2 * p + 1] = std::polar(1.0, -beta_plus) * down;
    }
    return out;
}

inline void require_label(const WalkerState& s, const PhaseSlice& ph) {
    if (ph.label != s.time_index() + 1)
        throw ContractError("phase label " + std::to_string(ph.label) + " does not follow state time index " +
                            std::to_string(s.time_index()));
}

}  // namespace detail

/// U_{j+1} = S(alpha_{j+1}, xi_{j+1}) C(theta).
inline WalkerState step_1d(const WalkerState& s, const PhaseSlice& ph, const WalkParams1D& params) {
    if (s.geom().dimension() != 1) throw std::invalid_argument("step_1d needs a 1D lattice");
    detail::require_label(s, ph);
    return detail::coin_and_shift(s, coin_matrix(params.theta), ph, Axis::X);
}

inline WalkerState step_1d(const WalkerState& s, const GaugePhases& phases, const WalkParams1D& params) {
    return step_1d(s, phase_slice(phases, s.time_index(), Axis::X), params);
}

/// Direction the next substep must take from time index j.
inline Axis substep_direction(long j) { return j % 2 == 0 ? Axis::X : Axis::Y; }

/// U^(i)_{j+1} = S^(i)(alpha/2, xi^i) C(theta^i).
inline WalkerState substep_2d(const WalkerState& s, Axis direction, const GaugePhases& phases,
                              const WalkParams2D& params) {
    if (s.geom().dimension() != 2) throw std::invalid_argument("substep_2d needs a 2D lattice");
    if (direction != Axis::X && direction != Axis::Y) throw std::invalid_argument("substep direction must be x or y");
    if (direction != substep_direction(s.time_index()))
        throw ContractError("substep direction does not match the parity of time index " +
                            std::to_string(s.time_index()));
    const PhaseSlice ph = phase_slice(phases, s.time_index(), direction);
    if (ph.alpha_weight != 0.5) throw ContractError("2D phases must couple alpha with weight 1/2");
    const double theta = direction == Axis::X ? params.theta1 : params.theta2;
    return detail::coin_and_shift(s, coin_matrix(theta), ph, direction);
}

/// U^2D = U^(2) U^(1): x-substep then y-substep, from an even time index.
inline WalkerState step_2d(const WalkerState& s, const GaugePhases& phases, const WalkParams2D& params) {
    if (s.time_index() % 2 != 0) throw ContractError("two-substep step must start at an even time index");
    return substep_2d(substep_2d(s, Axis::X, phases, params), Axis::Y, phases, params);
}

inline WalkerState advance(const WalkerState& s, const GaugePhases& phases, const WalkParams1D& params) {
    return step_1d(s, phases, params);
}

inline WalkerState advance(const WalkerState& s, const GaugePhases& phases, const WalkParams2D& params) {
    return substep_2d(s, substep_direction(s.time_index()), phases, params);
}

struct Trajectory {
    std::vector<WalkerState> states;
};

/// Observers see each state (including the initial one) by const reference.
using Observer = std::function<void(const WalkerState&)>;

/// Advances `n` time indices (steps in 1D, substeps in 2D). With keep_states
/// false only the final state is returned.
template <class Params>
Trajectory evolve(const WalkerState& s0, std::size_t n, const GaugePhases& phases, const Params& params,
                  const Observer& observer = {}, bool keep_states = true) {
    if (n > 0) {
        const long last = s0.time_index() + static_cast<long>(n) - 1;
        if (!phases.slice_for(s0.time_index()) || !phases.slice_for(last))
            throw ContractError("phase schedule does not cover " + std::to_string(n) + " steps from j=" +
                                std::to_string(s0.time_index()));
    }
    Trajectory traj;
    if (keep_states) traj.states.reserve(n + 1);
    WalkerState cur = s0;
    if (observer) observer(cur);
    if (keep_states) traj.states.push_back(cur);
    for (std::size_t k = 0; k < n; ++k) {
        cur = advance(cur, phases, params);
        if (observer) observer(cur);
        if (keep_states) traj.states.push_back(cur);
    }
    if (!keep_states) traj.states.push_back(std::move(cur));
    return traj;
}

/// Gaussian wavepacket exp(-r^2 / (4 w^2) + i k.r) times a coin polarization,
/// with r the minimal-image displacement from the center. Normalized on the lattice.
struct GaussianPacket {
    double center_x = 0.0;
    double center_y = 0.0;
    double width = 1.0;
    double kx = 0.0;
    double ky = 0.0;
    Complex pol_r = 1.0;
    Complex pol_l = 0.0;
};

inline double periodic_displacement(double x, double center, double length) {
    double d = std::fmod(x - center, length);
    if (d < -0.5 * length) d += length;
    if (d >= 0.5 * length) d -= length;
    return d;
}

/// Samples the packet's unnormalized spinor at (x, y) on a periodic box.
inline std::pair<Complex, Complex> gaussian_spinor(const GaussianPacket& gp, double x, double y, double lx,
                                                   double ly, int dimension) {
    const double dx = periodic_displacement(x, gp.center_x, lx);
    const double dy = dimension == 2 ? periodic_displacement(y, gp.center_y, ly) : 0.0;
    const double env = std::exp(-(dx * dx + dy * dy) / (4.0 * gp.width * gp.width));
    const Complex phase = std::polar(1.0, gp.kx * dx + gp.ky * dy);
    return {env * phase * gp.pol_r, env * phase * gp.pol_l};
}

inline WalkerState gaussian_packet(const LatticeGeom& g, const GaussianPacket& gp) {
    if (!(gp.width > 0.0)) throw std::invalid_argument("wavepacket width must be positive");
    WalkerState s(g);
    const double lx = static_cast<double>(g.extent_x()) * g.spacing();
    const double ly = static_cast<double>(g.extent_y()) * g.spacing();
    for (std::size_t p = 0; p < g.sites(); ++p) {
        const auto [r, l] = gaussian_spinor(gp, g.x(p), g.y(p), lx, ly, g.dimension());
        s.at(p, Coin::R) = r;
        s.at(p, Coin::L) = l;
    }
    normalize(s);
    return s;
}

inline WalkerState point_source(const LatticeGeom& g, std::size_t site, Coin c, Complex amplitude = 1.0) {
    if (site >= g.sites()) throw std::invalid_argument("point source outside the lattice");
    WalkerState s(g);
    s.at(site, c) = amplitude;
    return s;
}

}  // namespace gaugewalk
