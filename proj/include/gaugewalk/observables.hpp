#pragma once

// Probability density, two-step lattice currents of the alternating 2D walk,
// the coin-space stencil matrices behind them, and continuity residuals.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "gaugewalk/errors.hpp"
#include "gaugewalk/gauge.hpp"
#include "gaugewalk/lattice.hpp"
#include "gaugewalk/walk.hpp"

namespace gaugewalk {

/// J^0(site) = |psi_R|^2 + |psi_L|^2.
inline RealField probability_density(const WalkerState& s) {
    RealField rho(s.geom());
    for (std::size_t p = 0; p < s.geom().sites(); ++p)
        rho[p] = std::norm(s.at(p, Coin::R)) + std::norm(s.at(p, Coin::L));
    return rho;
}

inline double total(const RealField& f) {
    double acc = 0.0;
    for (double v : f.values) acc += v;
    return acc;
}

inline double max_abs(const RealField& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

/// Coin-space matrices of the two-step current stencil for angles (theta^1, theta^2).
/// mx[k] and my[k] hold M_x^(k+1), M_y^(k+1); mlambda[k] holds M_Lambda^(k+1).
struct MSet {
    double theta1 = 0.0;
    double theta2 = 0.0;
    Mat2 m_rx, m_lx, m_ry, m_ly;  // M_{s_i} = Lambda_s C_i
    std::array<Mat2, 4> mx;
    std::array<Mat2, 4> my;
    std::array<Mat2, 4> mlambda;

    /// Largest entrywise violation of the four M_Lambda decompositions.
    double identity_deviation() const {
        const std::array<Mat2, 4> rhs = {my[2] - mx[2], -my[2] - mx[3], my[3] + mx[2], -my[3] + mx[3]};
        double d = 0.0;
        for (int k = 0; k < 4; ++k) d = std::max(d, (mlambda[k] - rhs[k]).cwiseAbs().maxCoeff());
        return d;
    }

    Mat2 mx_sum() const { return mx[0] + mx[1] + mx[2] + mx[3]; }
    Mat2 my_sum() const { return my[0] + my[1] + my[2] + my[3]; }
};

inline MSet m_set(double theta1, double theta2, double identity_tol = 1e-13) {
    const Mat2 cx = coin_matrix(theta1).matrix();
    const Mat2 cy = coin_matrix(theta2).matrix();
    const Mat2 lr = projector(Coin::R), ll = projector(Coin::L);
    MSet m;
    m.theta1 = theta1;
    m.theta2 = theta2;
    m.m_rx = lr * cx;
    m.m_lx = ll * cx;
    m.m_ry = lr * cy;
    m.m_ly = ll * cy;
    const Mat2 &rx = m.m_rx, &lx = m.m_lx, &ry = m.m_ry, &ly = m.m_ly;

    m.mx[0] = ry * rx * rx.adjoint() * ly.adjoint();
    m.mx[1] = ly * rx * rx.adjoint() * ry.adjoint();
    m.mx[2] = ll * cy * lr * cy.adjoint() * ll;
    m.mx[3] = lr * cy * lr * cy.adjoint() * lr - cx.adjoint() * ll * cx;

    m.my[0] = lx.adjoint() * ry.adjoint() * ry * rx;
    m.my[1] = rx.adjoint() * ry.adjoint() * ry * lx;
    m.my[2] = cx.adjoint() * ll * cy.adjoint() * lr * cy * ll * cx;
    m.my[3] = cx.adjoint() * lr * cy.adjoint() * lr * cy * lr * cx - ll;

    m.mlambda[0] = lx.adjoint() * ry.adjoint() * ry * lx - ly * rx * rx.adjoint() * ly.adjoint();
    m.mlambda[1] = lx.adjoint() * ly.adjoint() * ly * lx - ry * rx * rx.adjoint() * ry.adjoint();
    m.mlambda[2] = rx.adjoint() * ry.adjoint() * ry * rx - ly * lx * lx.adjoint() * ly.adjoint();
    m.mlambda[3] = rx.adjoint() * ly.adjoint() * ly * rx - ry * lx * lx.adjoint() * ry.adjoint();

    const double dev = m.identity_deviation();
    if (dev > identity_tol)
        throw ConsistencyError("current stencil matrices violate the M_Lambda identities by " + std::to_string(dev));
    return m;
}

inline MSet m_set(const WalkParams2D& p) { return m_set(p.theta1, p.theta2); }

namespace detail {

inline Complex sandwich(std::span<const Complex> amp, std::size_t a, const Mat2& m, std::size_t b) {
    const Complex ar = std::conj(amp[2 * a]), al = std::conj(amp[2 * a + 1]);
    const Complex br = amp[2 * b], bl = amp[2 * b + 1];
    return ar * (m(0, 0) * br + m(0, 1) * bl) + al * (m(1, 0) * br + m(1, 1) * bl);
}

inline constexpr double kImagTolerance = 1e-10;

inline void require_current_time(const WalkerState& s) {
    if (s.geom().dimension() != 2) throw std::invalid_argument("lattice currents are defined for the 2D walk");
    if (s.time_index() % 2 != 0 || s.time_index() < 1)
        throw ContractError("currents are defined at even time indices >= 2 (got j=" +
                            std::to_string(s.time_index()) + ")");
}

}  // namespace detail

/// J^x(t, x, y): stencil along y built from the y-substep that ended at t.
inline RealField current_x(const WalkerState& s, const GaugePhases& phases, const MSet& m) {
    detail::require_current_time(s);
    const long j = s.time_index();
    const auto slice = phases.slice_for(j - 1);
    if (!slice) throw ContractError("phase schedule has no y-substep ending at j=" + std::to_string(j));
    const LatticeGeom& g = s.geom();
    auto amp = s.amplitudes();
    RealField out(g);
    double worst_imag = 0.0;
    for (std::size_t p = 0; p < g.sites(); ++p) {
        const std::size_t up = g.neighbor(p, Axis::Y, +1);
        const std::size_t dn = g.neighbor(p, Axis::Y, -1);
        const Complex ph = std::polar(1.0, phases.beta_minus(*slice, p, Axis::Y) +
                                               phases.beta_plus(*slice, dn, Axis::Y));
        const Complex v = ph * detail::sandwich(amp, up, m.mx[0], dn) +
                          std::conj(ph) * detail::sandwich(amp, dn, m.mx[1], up) +
                          detail::sandwich(amp, dn, m.mx[2], dn) + detail::sandwich(amp, up, m.mx[3], up);
        worst_imag = std::max(worst_imag, std::abs(v.imag()));
        out[p] = v.real();
    }
    if (worst_imag > detail::kImagTolerance)
        throw ConsistencyError("J^x has imaginary residue " + std::to_string(worst_imag));
    return out;
}

/// J^y(t, x, y): stencil along x built from the x-substep that starts at t.
inline RealField current_y(const WalkerState& s, const GaugePhases& phases, const MSet& m) {
    detail::require_current_time(s);
    const long j = s.time_index();
    const auto slice = phases.slice_for(j);
    if (!slice) throw ContractError("phase schedule has no x-substep leaving j=" + std::to_string(j));
    const LatticeGeom& g = s.geom();
    auto amp = s.amplitudes();
    RealField out(g);
    double worst_imag = 0.0;
    for (std::size_t p = 0; p < g.sites(); ++p) {
        const std::size_t right = g.neighbor(p, Axis::X, +1);
        const std::size_t left = g.neighbor(p, Axis::X, -1);
        const Complex ph = std::polar(1.0, phases.beta_plus(*slice, p, Axis::X) +
                                               phases.beta_minus(*slice, left, Axis::X));
        const Complex v = ph * detail::sandwich(amp, right, m.my[0], left) +
                          std::conj(ph) * detail::sandwich(amp, left, m.my[1], right) +
                          detail::sandwich(amp, right, m.my[2], right) +
                          detail::sandwich(amp, left, m.my[3], left);
        worst_imag = std::max(worst_imag, std::abs(v.imag()));
        out[p] = v.real();
    }
    if (worst_imag > detail::kImagTolerance)
        throw ConsistencyError("J^y has imaginary residue " + std::to_string(worst_imag));
    return out;
}

struct CurrentField {
    LatticeGeom geom;
    long time_index = 0;
    double t = 0.0;
    RealField j0;
    RealField jx;
    RealField jy;
};

inline CurrentField currents(const WalkerState& s, const GaugePhases& phases, const MSet& m) {
    return CurrentField{s.geom(), s.time_index(), time_of_index(s.geom(), s.time_index()),
                        probability_density(s), current_x(s, phases, m), current_y(s, phases, m)};
}

/// Half of f(+1) - f(-1) along a spatial axis, periodic.
inline RealField symmetric_difference(const RealField& f, Axis axis) {
    if (axis == Axis::T || !f.geom.has_axis(axis)) throw std::invalid_argument("spatial axis required");
    RealField out(f.geom);
    for (std::size_t p = 0; p < f.geom.sites(); ++p)
        out[p] = 0.5 * (f[f.geom.neighbor(p, axis, +1)] - f[f.geom.neighbor(p, axis, -1)]);
    return out;
}

/// Half of f(s+1) - f(s-1) between neighbouring entries of a series. Along
/// time the result covers the interior slices only.
inline FieldSeries symmetric_difference(const FieldSeries& f, Axis axis) {
    const LatticeGeom& g = f.geom();
    if (axis == Axis::T) {
        if (f.slices() < 3) throw std::domain_error("symmetric time difference needs at least three slices");
        FieldSeries out(g, f.slices() - 2, f.first_index() + 1);
        for (std::size_t s = 0; s + 2 < f.slices(); ++s)
            for (std::size_t p = 0; p < g.sites(); ++p) out.at(s, p) = 0.5 * (f.at(s + 2, p) - f.at(s, p));
        return out;
    }
    if (!g.has_axis(axis)) throw std::invalid_argument("axis not present on this lattice");
    FieldSeries out(g, f.slices(), f.first_index());
    for (std::size_t s = 0; s < f.slices(); ++s)
        for (std::size_t p = 0; p < g.sites(); ++p)
            out.at(s, p) = 0.5 * (f.at(s, g.neighbor(p, axis, +1)) - f.at(s, g.neighbor(p, axis, -1)));
    return out;
}

struct ContinuityReport {
    RealField residual;
    double max_abs = 0.0;
    double probability_drift = 0.0;
    long time_index = 0;
};

/// Residual of Delta^sym_0 J^0 + Delta^sym_1 J^x + Delta^sym_2 J^y at the time
/// of `cur`, from the window psi_{t-eps}, psi_t, psi_{t+eps} (time indices j-2, j, j+2).
inline ContinuityReport continuity_residual(const WalkerState& prev, const WalkerState& cur,
                                            const WalkerState& next, const GaugePhases& phases, const MSet& m) {
    detail::require_current_time(cur);
    if (prev.time_index() != cur.time_index() - 2 || next.time_index() != cur.time_index() + 2)
        throw ContractError("continuity window must hold time indices j-2, j, j+2");
    if (!(prev.geom() == cur.geom()) || !(next.geom() == cur.geom()))
        throw std::invalid_argument("continuity window mixes lattices");
    const RealField before = probability_density(prev);
    const RealField after = probability_density(next);
    const RealField dx = symmetric_difference(current_x(cur, phases, m), Axis::X);
    const RealField dy = symmetric_difference(current_y(cur, phases, m), Axis::Y);
    ContinuityReport rep{RealField(cur.geom()), 0.0, std::abs(total(after) - total(before)), cur.time_index()};
    for (std::size_t p = 0; p < cur.geom().sites(); ++p) {
        rep.residual[p] = 0.5 * (after[p] - before[p]) + dx[p] + dy[p];
        rep.max_abs = std::max(rep.max_abs, std::abs(rep.residual[p]));
    }
    return rep;
}

/// One-dimensional link flux of the step leaving `s`: the probability carried
/// across the link (p, p+1), |(C psi)_R(p)|^2 - |(C psi)_L(p+1)|^2.
inline RealField link_flux_1d(const WalkerState& s, const WalkParams1D& params) {
    if (s.geom().dimension() != 1) throw std::invalid_argument("link flux is defined on 1D lattices");
    const WalkerState c = apply_coin(s, coin_matrix(params.theta));
    RealField flux(s.geom());
    for (std::size_t p = 0; p < s.geom().sites(); ++p)
        flux[p] = std::norm(c.at(p, Coin::R)) - std::norm(c.at(s.geom().neighbor(p, Axis::X, 1), Coin::L));
    return flux;
}

/// rho_{j+1}(p) - rho_j(p) + flux(p) - flux(p-1) for one 1D step.
inline ContinuityReport continuity_residual_1d(const WalkerState& cur, const WalkerState& next,
                                               const WalkParams1D& params) {
    if (next.time_index() != cur.time_index() + 1) throw ContractError("1D continuity needs consecutive states");
    const RealField a = probability_density(cur), b = probability_density(next);
    const RealField flux = link_flux_1d(cur, params);
    ContinuityReport rep{RealField(cur.geom()), 0.0, std::abs(total(b) - total(a)), cur.time_index()};
    for (std::size_t p = 0; p < cur.geom().sites(); ++p) {
        rep.residual[p] = b[p] - a[p] + flux[p] - flux[cur.geom().neighbor(p, Axis::X, -1)];
        rep.max_abs = std::max(rep.max_abs, std::abs(rep.residual[p]));
    }
    return rep;
}

/// Total-probability change across one substep (the single-step balance).
inline double single_step_probability_drift(const WalkerState& a, const WalkerState& b) {
    return std::abs(total(probability_density(b)) - total(probability_density(a)));
}

}  // namespace gaugewalk
