#pragma once

// Lattice gauge phases, discrete derivatives, gauge transformations and the
// lattice field tensor.
//
// Time bookkeeping: a phase slice with base index j drives the (sub)step
// psi_j -> psi_{j+1}; it carries label j+1 and is sampled at the label's
// physical time (t = (j+1) eps in 1D, (j+1) eps / 2 in 2D). Derivatives of a
// gauge function chi evaluated "at j" use chi_j and chi_{j+1}, i.e. they live
// on the temporal link j -> j+1, which is where the phases of that step sit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaugewalk/errors.hpp"
#include "gaugewalk/lattice.hpp"

namespace gaugewalk {

/// Real field over a window of time slices. Slice s has time index first_index + s.
class FieldSeries {
public:
    FieldSeries() : geom_(LatticeGeom::line(2, 1.0)) {}
    FieldSeries(const LatticeGeom& g, std::size_t slices, long first_index = 0, double fill = 0.0)
        : geom_(g), first_(first_index), slices_(slices), v_(slices * g.sites(), fill) {}

    const LatticeGeom& geom() const noexcept { return geom_; }
    std::size_t slices() const noexcept { return slices_; }
    long first_index() const noexcept { return first_; }
    bool empty() const noexcept { return slices_ == 0; }

    double& at(std::size_t slice, std::size_t site) { return v_[slice * geom_.sites() + site]; }
    double at(std::size_t slice, std::size_t site) const { return v_[slice * geom_.sites() + site]; }

    std::span<const double> slice(std::size_t s) const {
        return std::span<const double>(v_).subspan(s * geom_.sites(), geom_.sites());
    }
    std::span<const double> values() const noexcept { return v_; }
    std::span<double> values() noexcept { return v_; }

private:
    LatticeGeom geom_;
    long first_ = 0;
    std::size_t slices_ = 0;
    std::vector<double> v_;
};

inline double max_abs(const FieldSeries& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_difference(const FieldSeries& a, const FieldSeries& b) {
    if (a.slices() != b.slices() || a.geom().sites() != b.geom().sites())
        throw std::invalid_argument("field series shapes differ");
    double m = 0.0;
    auto x = a.values();
    auto y = b.values();
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

using ScalarFunction = std::function<double(double t, double x, double y)>;

/// Continuum potential A^mu(t, x, y) (contravariant) with charge and coupling scale.
struct PotentialSpec {
    ScalarFunction a0;
    ScalarFunction a1;
    ScalarFunction a2;  // unused in 1D
    double charge = 1.0;
    std::optional<double> eps_A;  // defaults to the lattice spacing
    bool time_independent = false;

    static PotentialSpec zero(double charge = 1.0) {
        auto z = [](double, double, double) { return 0.0; };
        return PotentialSpec{z, z, z, charge, std::nullopt, true};
    }
};

/// Physical time of time index j: j eps in 1D, j eps / 2 in 2D.
inline double time_of_index(const LatticeGeom& g, long j) {
    return g.dimension() == 1 ? static_cast<double>(j) * g.spacing()
                              : 0.5 * static_cast<double>(j) * g.spacing();
}

/// Samples f on slices with time indices first_index + s, evaluated at time index + label_offset.
inline FieldSeries sample_series(const ScalarFunction& f, const LatticeGeom& g, std::size_t slices,
                                 long first_index, long label_offset, double scale = 1.0) {
    FieldSeries out(g, slices, first_index);
    for (std::size_t s = 0; s < slices; ++s) {
        const long j = first_index + static_cast<long>(s);
        const double t = time_of_index(g, j + label_offset);
        for (std::size_t site = 0; site < g.sites(); ++site) {
            double v;
            try {
                v = f(t, g.x(site), g.y(site));
            } catch (const std::exception& e) {
                throw SamplingError(j + label_offset, site, e.what());
            }
            if (!std::isfinite(v)) throw SamplingError(j + label_offset, site, "non-finite value");
            out.at(s, site) = scale * v;
        }
    }
    return out;
}

/// Lattice phases alpha, xi^1, xi^2 for a schedule of (sub)steps. Slice s has
/// base index first_index + s. In 2D every substep couples to alpha / 2.
struct GaugePhases {
    LatticeGeom geom;
    FieldSeries alpha;
    FieldSeries xi1;
    FieldSeries xi2;  // empty in 1D
    double eps_A = 1.0;
    bool substep_halving = false;

    std::size_t slices() const noexcept { return alpha.slices(); }
    long first_index() const noexcept { return alpha.first_index(); }
    double alpha_weight() const noexcept { return substep_halving ? 0.5 : 1.0; }

    const FieldSeries& xi(Axis a) const { return a == Axis::Y ? xi2 : xi1; }

    /// beta_- = xi - w alpha along the given axis.
    double beta_minus(std::size_t s, std::size_t site, Axis a) const {
        return xi(a).at(s, site) - alpha_weight() * alpha.at(s, site);
    }
    /// beta_+ = xi + w alpha.
    double beta_plus(std::size_t s, std::size_t site, Axis a) const {
        return xi(a).at(s, site) + alpha_weight() * alpha.at(s, site);
    }

    /// Slice index of the step leaving time index j, or nullopt when out of range.
    std::optional<std::size_t> slice_for(long j) const {
        const long s = j - first_index();
        if (s < 0 || s >= static_cast<long>(slices())) return std::nullopt;
        return static_cast<std::size_t>(s);
    }

    static GaugePhases zero(const LatticeGeom& g, std::size_t steps, long first_index = 0) {
        GaugePhases p{g, FieldSeries(g, steps, first_index), FieldSeries(g, steps, first_index),
                      g.dimension() == 2 ? FieldSeries(g, steps, first_index) : FieldSeries(),
                      g.spacing(), g.dimension() == 2};
        return p;
    }
};

/// alpha = eps_A q A^0, xi^i = eps_A q A^i for `steps` (sub)steps starting at time index 0.
inline GaugePhases sample_phases(const PotentialSpec& spec, const LatticeGeom& g, std::size_t steps,
                                 long first_index = 0) {
    if (steps < 1) throw std::invalid_argument("sample_phases needs at least one step");
    if (!spec.a0 || !spec.a1 || (g.dimension() == 2 && !spec.a2))
        throw std::invalid_argument("potential spec is missing a component");
    const double eps_A = spec.eps_A.value_or(g.spacing());
    const double scale = eps_A * spec.charge;
    GaugePhases p;
    p.geom = g;
    p.alpha = sample_series(spec.a0, g, steps, first_index, 1, scale);
    p.xi1 = sample_series(spec.a1, g, steps, first_index, 1, scale);
    if (g.dimension() == 2) p.xi2 = sample_series(spec.a2, g, steps, first_index, 1, scale);
    p.eps_A = eps_A;
    p.substep_halving = g.dimension() == 2;
    return p;
}

/// Gauge function chi sampled on the sites (not links) of the time lattice:
/// slice j is chi_j at t = time_of_index(j).
struct GaugeFunction {
    FieldSeries chi;

    static GaugeFunction sample(const ScalarFunction& f, const LatticeGeom& g, std::size_t slices) {
        return GaugeFunction{sample_series(f, g, slices, 0, 0)};
    }
};

enum class DiffKind { Sum, Difference };

/// One-link sum (Q_{+1} + Q) or difference (Q_{+1} - Q) along an axis. Space
/// wraps periodically; along time the result has one slice fewer.
inline FieldSeries sigma_delta(const FieldSeries& f, Axis axis, DiffKind kind) {
    const LatticeGeom& g = f.geom();
    if (!g.has_axis(axis)) throw std::invalid_argument("axis not present on this lattice");
    const double sign = kind == DiffKind::Sum ? 1.0 : -1.0;
    if (axis == Axis::T) {
        if (f.slices() < 2) throw std::domain_error("time sum/difference needs at least two slices");
        FieldSeries out(g, f.slices() - 1, f.first_index());
        for (std::size_t s = 0; s + 1 < f.slices(); ++s)
            for (std::size_t site = 0; site < g.sites(); ++site)
                out.at(s, site) = f.at(s + 1, site) + sign * f.at(s, site);
        return out;
    }
    FieldSeries out(g, f.slices(), f.first_index());
    for (std::size_t s = 0; s < f.slices(); ++s)
        for (std::size_t site = 0; site < g.sites(); ++site)
            out.at(s, site) = f.at(s, g.neighbor(site, axis, 1)) + sign * f.at(s, site);
    return out;
}

inline FieldSeries scaled(FieldSeries f, double k) {
    for (double& v : f.values()) v *= k;
    return f;
}

/// `Averaged` divides the one-link sum by two so that d_mu -> partial_mu and
/// the walk is exactly gauge covariant. `Unaveraged` omits that factor on the
/// axes where it applies; it exists as a negative control.
enum class DerivativeNormalization { Averaged, Unaveraged };

/// d_i = Delta_i Sigma_0 / (2 eps_A) for a spatial axis.
inline FieldSeries discrete_space_derivative(const FieldSeries& chi, Axis mu, double eps_A,
                                             DerivativeNormalization n = DerivativeNormalization::Averaged) {
    if (mu == Axis::T) throw std::invalid_argument("use discrete_time_derivative for the time axis");
    const double norm = n == DerivativeNormalization::Averaged ? 2.0 * eps_A : eps_A;
    return scaled(sigma_delta(sigma_delta(chi, Axis::T, DiffKind::Sum), mu, DiffKind::Difference), 1.0 / norm);
}

/// Temporal derivative Delta_0 Sigma_k with an explicit summation axis k.
/// 1D: divided by 2 eps_A. 2D: divided by eps_A, because each substep spans
/// half a time unit and couples to alpha / 2.
inline FieldSeries discrete_time_derivative(const FieldSeries& chi, Axis sum_axis, double eps_A,
                                            DerivativeNormalization n = DerivativeNormalization::Averaged) {
    if (sum_axis == Axis::T) throw std::invalid_argument("time derivative sums along a spatial axis");
    const bool one_d = chi.geom().dimension() == 1;
    const double norm = one_d && n == DerivativeNormalization::Averaged ? 2.0 * eps_A : eps_A;
    return scaled(sigma_delta(sigma_delta(chi, sum_axis, DiffKind::Sum), Axis::T, DiffKind::Difference),
                  1.0 / norm);
}

/// Summation axis of the temporal derivative at base index j: x for 1D and
/// for even j in 2D, y for odd j in 2D.
inline Axis time_sum_axis(const LatticeGeom& g, long j) {
    if (g.dimension() == 1) return Axis::X;
    return (j % 2 == 0) ? Axis::X : Axis::Y;
}

/// d_mu chi. In 2D the temporal derivative follows the parity rule slice by slice.
inline FieldSeries discrete_derivative(const FieldSeries& chi, Axis mu, double eps_A,
                                       DerivativeNormalization n = DerivativeNormalization::Averaged) {
    if (!chi.geom().has_axis(mu)) throw std::invalid_argument("axis not present on this lattice");
    if (mu != Axis::T) return discrete_space_derivative(chi, mu, eps_A, n);
    if (chi.geom().dimension() == 1) return discrete_time_derivative(chi, Axis::X, eps_A, n);
    FieldSeries dx = discrete_time_derivative(chi, Axis::X, eps_A, n);
    const FieldSeries dy = discrete_time_derivative(chi, Axis::Y, eps_A, n);
    for (std::size_t s = 0; s < dx.slices(); ++s) {
        if (time_sum_axis(chi.geom(), dx.first_index() + static_cast<long>(s)) == Axis::X) continue;
        for (std::size_t site = 0; site < chi.geom().sites(); ++site) dx.at(s, site) = dy.at(s, site);
    }
    return dx;
}

namespace detail {

inline void require_chi_covers(const FieldSeries& chi, long first, std::size_t slices) {
    if (chi.first_index() > first ||
        chi.first_index() + static_cast<long>(chi.slices()) < first + static_cast<long>(slices) + 1)
        throw std::domain_error("gauge function does not cover every time slice the phases use");
}

inline FieldSeries window(const FieldSeries& f, long first, std::size_t slices) {
    FieldSeries out(f.geom(), slices, first);
    const long off = first - f.first_index();
    for (std::size_t s = 0; s < slices; ++s)
        for (std::size_t site = 0; site < f.geom().sites(); ++site)
            out.at(s, site) = f.at(static_cast<std::size_t>(off) + s, site);
    return out;
}

}  // namespace detail

/// Phases seen by the walker after psi -> exp(i q chi) psi: A_mu -> A_mu - d_mu chi,
/// i.e. alpha -> alpha - eps_A q d_0 chi and xi^i -> xi^i + eps_A q d_i chi.
inline GaugePhases gauge_transform(const GaugePhases& phases, const GaugeFunction& gf, double charge,
                                   DerivativeNormalization n = DerivativeNormalization::Averaged) {
    const LatticeGeom& g = phases.geom;
    if (!(gf.chi.geom() == g)) throw std::invalid_argument("gauge function lives on a different lattice");
    detail::require_chi_covers(gf.chi, phases.first_index(), phases.slices());
    const FieldSeries chi = detail::window(gf.chi, phases.first_index(), phases.slices() + 1);
    const double k = phases.eps_A * charge;

    GaugePhases out = phases;
    const FieldSeries d0 = discrete_derivative(chi, Axis::T, phases.eps_A, n);
    const FieldSeries d1 = discrete_derivative(chi, Axis::X, phases.eps_A, n);
    for (std::size_t s = 0; s < phases.slices(); ++s)
        for (std::size_t site = 0; site < g.sites(); ++site) {
            out.alpha.at(s, site) -= k * d0.at(s, site);
            out.xi1.at(s, site) += k * d1.at(s, site);
        }
    if (g.dimension() == 2) {
        const FieldSeries d2 = discrete_derivative(chi, Axis::Y, phases.eps_A, n);
        for (std::size_t s = 0; s < phases.slices(); ++s)
            for (std::size_t site = 0; site < g.sites(); ++site) out.xi2.at(s, site) += k * d2.at(s, site);
    }
    return out;
}

/// Covariant potential A_0 = A^0, A_i = -A^i on the link slices of a schedule.
/// In 2D the temporal component has two branches: `a0` is the one seen by
/// x-substeps (transforms with d_0^1), `a0_y` the one seen by y-substeps
/// (transforms with d_0^2). Sampled or phase-derived potentials carry the same
/// values in both branches.
struct CovariantPotential {
    LatticeGeom geom;
    FieldSeries a0;
    FieldSeries a0_y;  // 2D only
    FieldSeries a1;
    FieldSeries a2;  // 2D only
    double eps_A = 1.0;

    static CovariantPotential from_phases(const GaugePhases& p, double charge) {
        if (charge == 0.0) throw std::invalid_argument("cannot recover potentials from phases at zero charge");
        const double k = 1.0 / (p.eps_A * charge);
        CovariantPotential c{p.geom, scaled(p.alpha, k), FieldSeries(), scaled(p.xi1, -k), FieldSeries(), p.eps_A};
        if (p.geom.dimension() == 2) {
            c.a0_y = c.a0;
            c.a2 = scaled(p.xi2, -k);
        }
        return c;
    }

    static CovariantPotential sample(const PotentialSpec& spec, const LatticeGeom& g, std::size_t slices,
                                     long first_index = 0) {
        CovariantPotential c;
        c.geom = g;
        c.eps_A = spec.eps_A.value_or(g.spacing());
        c.a0 = sample_series(spec.a0, g, slices, first_index, 1, 1.0);
        c.a1 = sample_series(spec.a1, g, slices, first_index, 1, -1.0);
        if (g.dimension() == 2) {
            c.a0_y = c.a0;
            c.a2 = sample_series(spec.a2, g, slices, first_index, 1, -1.0);
        }
        return c;
    }

    /// A_mu = d_mu chi; its field tensor vanishes identically.
    static CovariantPotential pure_gauge(const GaugeFunction& gf, double eps_A) {
        const FieldSeries& chi = gf.chi;
        CovariantPotential c;
        c.geom = chi.geom();
        c.eps_A = eps_A;
        c.a1 = discrete_space_derivative(chi, Axis::X, eps_A);
        if (chi.geom().dimension() == 1) {
            c.a0 = discrete_time_derivative(chi, Axis::X, eps_A);
        } else {
            c.a0 = discrete_time_derivative(chi, Axis::X, eps_A);
            c.a0_y = discrete_time_derivative(chi, Axis::Y, eps_A);
            c.a2 = discrete_space_derivative(chi, Axis::Y, eps_A);
        }
        return c;
    }

    std::size_t slices() const noexcept { return a0.slices(); }
};

/// A_mu -> A_mu - d_mu chi, with each 2D temporal branch using its own d_0^k.
inline CovariantPotential gauge_transform(const CovariantPotential& a, const GaugeFunction& gf) {
    detail::require_chi_covers(gf.chi, a.a0.first_index(), a.slices());
    const FieldSeries chi = detail::window(gf.chi, a.a0.first_index(), a.slices() + 1);
    CovariantPotential out = a;
    auto sub = [](FieldSeries& f, const FieldSeries& d) {
        auto v = f.values();
        auto w = d.values();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= w[i];
    };
    sub(out.a0, discrete_time_derivative(chi, Axis::X, a.eps_A));
    sub(out.a1, discrete_space_derivative(chi, Axis::X, a.eps_A));
    if (a.geom.dimension() == 2) {
        sub(out.a0_y, discrete_time_derivative(chi, Axis::Y, a.eps_A));
        sub(out.a2, discrete_space_derivative(chi, Axis::Y, a.eps_A));
    }
    return out;
}

/// Antisymmetric lattice field tensor. Only F_01, F_02, F_12 are stored; the
/// lower components are their exact negatives.
struct FieldTensor {
    LatticeGeom geom;
    FieldSeries f01;
    FieldSeries f02;  // 2D only
    FieldSeries f12;  // 2D only

    FieldSeries component(Axis mu, Axis nu) const {
        const int a = static_cast<int>(mu), b = static_cast<int>(nu);
        if (a == b) {
            const FieldSeries& ref = f01;
            return FieldSeries(ref.geom(), ref.slices(), ref.first_index());
        }
        const int lo = std::min(a, b), hi = std::max(a, b);
        const FieldSeries* f = nullptr;
        if (lo == 0 && hi == 1) f = &f01;
        else if (lo == 0 && hi == 2) f = &f02;
        else f = &f12;
        if (f->empty()) throw std::invalid_argument("component not present in 1D");
        return a < b ? *f : scaled(*f, -1.0);
    }
};

/// F_mu_nu = d_mu A_nu - d_nu A_mu. In 2D F_0i uses d_0^i together with the
/// temporal branch seen by the i-substeps.
inline FieldTensor field_tensor(const CovariantPotential& a) {
    const double e = a.eps_A;
    auto minus = [](FieldSeries x, const FieldSeries& y) {
        auto v = x.values();
        auto w = y.values();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= w[i];
        return x;
    };
    FieldTensor f;
    f.geom = a.geom;
    f.f01 = minus(discrete_time_derivative(a.a1, Axis::X, e), discrete_space_derivative(a.a0, Axis::X, e));
    if (a.geom.dimension() == 2) {
        f.f02 = minus(discrete_time_derivative(a.a2, Axis::Y, e), discrete_space_derivative(a.a0_y, Axis::Y, e));
        f.f12 = minus(discrete_space_derivative(a.a2, Axis::X, e), discrete_space_derivative(a.a1, Axis::Y, e));
    }
    return f;
}

}  // namespace gaugewalk
