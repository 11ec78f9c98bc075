#pragma once

// Periodic 1D/2D lattices, two-component walker states and 2x2 coin algebra.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaugewalk/errors.hpp"

namespace gaugewalk {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

enum class Coin : int { R = 0, L = 1 };

enum class Axis : int { T = 0, X = 1, Y = 2 };

inline constexpr double kPi = 3.14159265358979323846;

/// Periodic lattice with shared space/time spacing. Sites are numbered
/// x-fastest: site = ix + extent_x * iy.
class LatticeGeom {
public:
    /// Two-site unit line; placeholder for default-constructed aggregates.
    LatticeGeom() : LatticeGeom(1, 2, 1, 1.0) {}

    static LatticeGeom line(std::size_t extent_x, double spacing) {
        return LatticeGeom(1, extent_x, 1, spacing);
    }
    static LatticeGeom plane(std::size_t extent_x, std::size_t extent_y, double spacing) {
        return LatticeGeom(2, extent_x, extent_y, spacing);
    }

    int dimension() const noexcept { return dim_; }
    std::size_t extent_x() const noexcept { return nx_; }
    std::size_t extent_y() const noexcept { return ny_; }
    std::size_t extent(Axis a) const { return a == Axis::X ? nx_ : a == Axis::Y ? ny_ : 0; }
    double spacing() const noexcept { return eps_; }
    std::size_t sites() const noexcept { return nx_ * ny_; }

    std::size_t site(std::size_t ix, std::size_t iy = 0) const noexcept { return ix + nx_ * iy; }
    std::size_t ix(std::size_t site) const noexcept { return site % nx_; }
    std::size_t iy(std::size_t site) const noexcept { return site / nx_; }
    double x(std::size_t site) const noexcept { return static_cast<double>(ix(site)) * eps_; }
    double y(std::size_t site) const noexcept { return static_cast<double>(iy(site)) * eps_; }

    /// Site reached by moving `delta` links along `axis`, wrapping periodically.
    std::size_t neighbor(std::size_t s, Axis axis, long delta) const noexcept {
        const auto wrap = [](std::size_t i, long d, std::size_t n) {
            const long m = static_cast<long>(n);
            long r = (static_cast<long>(i) + d) % m;
            return static_cast<std::size_t>(r < 0 ? r + m : r);
        };
        if (axis == Axis::X) return site(wrap(ix(s), delta, nx_), iy(s));
        return site(ix(s), wrap(iy(s), delta, ny_));
    }

    bool has_axis(Axis a) const noexcept {
        return a == Axis::T || a == Axis::X || (a == Axis::Y && dim_ == 2);
    }

    friend bool operator==(const LatticeGeom&, const LatticeGeom&) = default;

private:
    LatticeGeom(int dim, std::size_t nx, std::size_t ny, double eps)
        : dim_(dim), nx_(nx), ny_(ny), eps_(eps) {
        if (nx < 2 || (dim == 2 && ny < 2))
            throw std::invalid_argument("lattice extents must be >= 2");
        if (!(eps > 0.0) || !std::isfinite(eps))
            throw std::invalid_argument("lattice spacing must be positive and finite");
    }

    int dim_;
    std::size_t nx_, ny_;
    double eps_;
};

/// Real scalar field on one time slice.
struct RealField {
    LatticeGeom geom;
    std::vector<double> values;

    explicit RealField(const LatticeGeom& g, double fill = 0.0) : geom(g), values(g.sites(), fill) {}

    double& operator[](std::size_t site) { return values[site]; }
    double operator[](std::size_t site) const { return values[site]; }
};

/// 2x2 coin-space operator. Coin rotations are unitary and checked on
/// construction; the current-stencil matrices are not and use `unchecked`.
class CoinOperator {
public:
    static CoinOperator unitary(const Mat2& m, double tol = 1e-13) {
        if (!m.allFinite()) throw std::invalid_argument("coin matrix has non-finite entries");
        const double dev = (m.adjoint() * m - Mat2::Identity()).cwiseAbs().maxCoeff();
        if (dev > tol)
            throw std::invalid_argument("coin matrix is not unitary (deviation " + std::to_string(dev) + ")");
        return CoinOperator(m);
    }
    static CoinOperator unchecked(const Mat2& m) { return CoinOperator(m); }

    const Mat2& matrix() const noexcept { return m_; }
    Complex operator()(int r, int c) const { return m_(r, c); }

    CoinOperator adjoint() const { return CoinOperator(m_.adjoint()); }
    friend CoinOperator operator*(const CoinOperator& a, const CoinOperator& b) {
        return CoinOperator(a.m_ * b.m_);
    }

private:
    explicit CoinOperator(const Mat2& m) : m_(m) {}
    Mat2 m_;
};

/// C(theta) = exp(i sigma^1 theta / 2).
inline CoinOperator coin_matrix(double theta) {
    if (!std::isfinite(theta)) throw std::invalid_argument("coin angle must be finite");
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    Mat2 m;
    m << Complex(c, 0.0), Complex(0.0, s), Complex(0.0, s), Complex(c, 0.0);
    return CoinOperator::unitary(m);
}

inline Mat2 projector(Coin c) {
    Mat2 m = Mat2::Zero();
    m(static_cast<int>(c), static_cast<int>(c)) = 1.0;
    return m;
}

/// Two-component amplitude field, stored site-major with the coin index
/// fastest: amp[2 * site + coin].
class WalkerState {
public:
    explicit WalkerState(const LatticeGeom& geom, long time_index = 0)
        : geom_(geom), amp_(2 * geom.sites()), time_index_(time_index) {
        if (time_index < 0) throw std::invalid_argument("time index must be >= 0");
    }

    const LatticeGeom& geom() const noexcept { return geom_; }
    long time_index() const noexcept { return time_index_; }
    void set_time_index(long j) { time_index_ = j; }

    Complex& at(std::size_t site, Coin c) { return amp_[2 * site + static_cast<int>(c)]; }
    Complex at(std::size_t site, Coin c) const { return amp_[2 * site + static_cast<int>(c)]; }

    std::span<Complex> amplitudes() noexcept { return amp_; }
    std::span<const Complex> amplitudes() const noexcept { return amp_; }

private:
    LatticeGeom geom_;
    std::vector<Complex> amp_;
    long time_index_;
};

/// sqrt of the sum of |amp|^2, summed site-major with the coin inner.
inline double state_norm(const WalkerState& s) {
    double acc = 0.0;
    for (const Complex& a : s.amplitudes()) acc += std::norm(a);
    return std::sqrt(acc);
}

inline void normalize(WalkerState& s) {
    const double n = state_norm(s);
    if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero state");
    for (Complex& a : s.amplitudes()) a /= n;
}

inline WalkerState apply_coin(const WalkerState& in, const CoinOperator& c) {
    WalkerState out(in.geom(), in.time_index());
    const Mat2& m = c.matrix();
    auto src = in.amplitudes();
    auto dst = out.amplitudes();
    for (std::size_t s = 0; s < in.geom().sites(); ++s) {
        const Complex r = src[2 * s], l = src[2 * s + 1];
        dst[2 * s] = m(0, 0) * r + m(0, 1) * l;
        dst[2 * s + 1] = m(1, 0) * r + m(1, 1) * l;
    }
    return out;
}

/// Largest |a_i - b_i| over all amplitudes.
inline double max_abs_difference(const WalkerState& a, const WalkerState& b) {
    if (!(a.geom() == b.geom())) throw std::invalid_argument("states live on different lattices");
    double d = 0.0;
    auto x = a.amplitudes();
    auto y = b.amplitudes();
    for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
    return d;
}

}  // namespace gaugewalk
