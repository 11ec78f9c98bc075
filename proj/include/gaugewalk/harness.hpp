#pragma once

// Orchestration behind the command-line tool: simulate, check, converge.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaugewalk/config.hpp"
#include "gaugewalk/csv.hpp"
#include "gaugewalk/dirac.hpp"
#include "gaugewalk/gauge.hpp"
#include "gaugewalk/observables.hpp"
#include "gaugewalk/walk.hpp"

namespace gaugewalk {

/// Time indices per full step: 1 in 1D, 2 (x then y) in 2D.
inline std::size_t indices_per_step(const RunConfig& c) { return c.dimension == 1 ? 1 : 2; }

inline WalkerState initial_state(const RunConfig& c, const LatticeGeom& g) {
    switch (c.initial.kind) {
        case InitialKind::Point:
            return point_source(g, g.site(c.initial.site_x, c.initial.site_y), c.initial.coin);
        case InitialKind::Random: {
            std::mt19937_64 rng(c.seed);
            std::normal_distribution<double> n(0.0, 1.0);
            WalkerState s(g);
            for (std::size_t p = 0; p < g.sites(); ++p)
                for (Coin k : {Coin::R, Coin::L}) {
                    const double re = n(rng);
                    s.at(p, k) = Complex(re, n(rng));
                }
            normalize(s);
            return s;
        }
        case InitialKind::Gaussian:
        default:
            return gaussian_packet(g, c.initial.packet);
    }
}

/// The configured chi, or a smooth random gauge function drawn from the seed.
inline ScalarFunction gauge_function(const RunConfig& c) {
    if (c.chi) {
        const expr::ExprAst ast = expr::parse(*c.chi);
        return ast;
    }
    std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    struct Mode { double a, kx, ky, w, phi; };
    std::vector<Mode> modes;
    for (int k = 0; k < 4; ++k) {
        const double a = u(rng), kx = 3.0 * u(rng), ky = 3.0 * u(rng), w = 3.0 * u(rng), phi = kPi * u(rng);
        modes.push_back({a, kx, ky, w, phi});
    }
    return [modes](double t, double x, double y) {
        double v = 0.0;
        for (const auto& m : modes) v += m.a * std::sin(m.kx * x + m.ky * y + m.w * t + m.phi);
        return v;
    };
}

struct SimulationSummary {
    std::size_t states = 0;
    double max_norm_deviation = 0.0;
    double max_continuity_residual = 0.0;
};

namespace detail {

template <class Params>
WalkerState advance_full_step(const WalkerState& s, const GaugePhases& ph, const Params& params) {
    if constexpr (std::is_same_v<Params, WalkParams1D>) return step_1d(s, ph, params);
    else return step_2d(s, ph, params);
}

}  // namespace detail

/// Writes probability.csv, observables.csv, snapshot_initial.csv and
/// snapshot_final.csv into `out`. n_steps counts full steps.
inline SimulationSummary run_simulate(const RunConfig& c, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    const LatticeGeom g = c.geom();
    const PotentialSpec pot = potential_spec(c);
    const std::size_t per = indices_per_step(c);
    const std::size_t n = c.n_steps;
    const GaugePhases ph = n > 0 ? sample_phases(pot, g, per * n) : GaugePhases::zero(g, 1);

    SimulationSummary sum;
    WalkerState cur = initial_state(c, g);
    write_snapshot(out / "snapshot_initial.csv", cur);
    const double n0 = state_norm(cur);

    CsvWriter prob(out / "probability.csv", "t,time_index,total_probability");
    auto record_prob = [&](const WalkerState& s) {
        const double tot = total(probability_density(s));
        prob.row({time_of_index(g, s.time_index()), static_cast<double>(s.time_index()), tot});
        sum.max_norm_deviation = std::max(sum.max_norm_deviation, std::abs(std::sqrt(tot) - n0));
        ++sum.states;
    };

    if (c.dimension == 1) {
        CsvWriter obs(out / "observables.csv", "t,x,J0,Jx,residual");
        const WalkParams1D params = c.params_1d();
        record_prob(cur);
        for (std::size_t k = 0; k < n; ++k) {
            WalkerState next = step_1d(cur, ph, params);
            const RealField rho = probability_density(cur);
            const RealField flux = link_flux_1d(cur, params);
            const ContinuityReport rep = continuity_residual_1d(cur, next, params);
            sum.max_continuity_residual = std::max(sum.max_continuity_residual, rep.max_abs);
            const double t = time_of_index(g, cur.time_index());
            for (std::size_t p = 0; p < g.sites(); ++p) obs.row({t, g.x(p), rho[p], flux[p], rep.residual[p]});
            cur = std::move(next);
            record_prob(cur);
        }
        obs.close();
    } else {
        CsvWriter obs(out / "observables.csv", "t,x,y,J0,Jx,Jy,residual");
        const WalkParams2D params = c.params_2d();
        const MSet m = m_set(params.theta1, params.theta2, 1e-12);
        std::deque<WalkerState> window;
        window.push_back(cur);
        record_prob(cur);
        for (std::size_t k = 0; k < n; ++k) {
            cur = step_2d(cur, ph, params);
            record_prob(cur);
            window.push_back(cur);
            if (window.size() > 3) window.pop_front();
            if (window.size() == 3) {
                const WalkerState& mid = window[1];
                const CurrentField j = currents(mid, ph, m);
                const ContinuityReport rep = continuity_residual(window[0], mid, window[2], ph, m);
                sum.max_continuity_residual = std::max(sum.max_continuity_residual, rep.max_abs);
                for (std::size_t p = 0; p < g.sites(); ++p)
                    obs.row({j.t, g.x(p), g.y(p), j.j0[p], j.jx[p], j.jy[p], rep.residual[p]});
            }
        }
        obs.close();
    }
    prob.close();
    write_snapshot(out / "snapshot_final.csv", cur);
    return sum;
}

enum class CheckStatus { Pass, Fail, Skipped, Error };

inline const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Skipped: return "skipped";
        case CheckStatus::Error: return "error";
    }
    return "?";
}

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    double deviation = 0.0;
    double tolerance = 0.0;
    std::string note;
};

struct CheckReport {
    std::vector<CheckResult> checks;

    bool crashed() const {
        return std::any_of(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::Error; });
    }
    bool passed() const {
        return std::none_of(checks.begin(), checks.end(), [](const auto& c) {
            return c.status == CheckStatus::Fail || c.status == CheckStatus::Error;
        });
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : checks)
            arr.push_back({{"name", c.name},
                           {"status", to_string(c.status)},
                           {"max_deviation", c.deviation},
                           {"tolerance", c.tolerance},
                           {"note", c.note}});
        return {{"passed", passed()}, {"checks", arr}};
    }
};

namespace detail {

inline CheckResult graded(std::string name, double dev, double tol, std::string note = {}) {
    return {std::move(name), dev <= tol ? CheckStatus::Pass : CheckStatus::Fail, dev, tol, std::move(note)};
}

template <class Params>
CheckResult check_unitarity(const WalkerState& s0, std::size_t n_idx, const GaugePhases& ph, const Params& params) {
    double worst = 0.0;
    if (n_idx > 0)
        evolve(s0, n_idx, ph, params,
               [&](const WalkerState& s) { worst = std::max(worst, std::abs(state_norm(s) - 1.0)); }, false);
    else
        worst = std::abs(state_norm(s0) - 1.0);
    return graded("unitarity", worst, 1e-12, n_idx == 0 ? "no steps; initial norm only" : "");
}

template <class Params>
CheckResult check_gauge(const RunConfig& c, const WalkerState& s0, std::size_t n_idx, const GaugePhases& ph,
                        const Params& params) {
    const LatticeGeom& g = s0.geom();
    const GaugeFunction gf{sample_series(gauge_function(c), g, n_idx + 1, 0, 0)};
    double worst = 0.0;
    auto rotated = [&](const WalkerState& s) {
        WalkerState r = s;
        const std::size_t slice = static_cast<std::size_t>(s.time_index());
        for (std::size_t p = 0; p < g.sites(); ++p) {
            const Complex f = std::polar(1.0, c.charge * gf.chi.at(slice, p));
            r.at(p, Coin::R) *= f;
            r.at(p, Coin::L) *= f;
        }
        return r;
    };
    if (n_idx > 0) {
        const GaugePhases ph2 = gauge_transform(ph, gf, c.charge, c.gauge_normalization);
        const Trajectory a = evolve(s0, n_idx, ph, params);
        const Trajectory b = evolve(rotated(s0), n_idx, ph2, params);
        for (std::size_t j = 0; j <= n_idx; ++j)
            worst = std::max(worst, max_abs_difference(b.states[j], rotated(a.states[j])));
    }
    return graded("gauge-equivariance", worst, 1e-12, n_idx == 0 ? "no steps" : "");
}

inline CheckResult check_tensor(const RunConfig& c, const LatticeGeom& g, std::size_t n_idx) {
    const std::size_t slices = std::max<std::size_t>(n_idx, 2);
    const PotentialSpec pot = potential_spec(c);
    const CovariantPotential a = CovariantPotential::sample(pot, g, slices);
    const GaugeFunction gf{sample_series(gauge_function(c), g, slices + 1, 0, 0)};
    const FieldTensor f = field_tensor(a);
    const FieldTensor f2 = field_tensor(gauge_transform(a, gf));
    const FieldTensor pure = field_tensor(CovariantPotential::pure_gauge(gf, a.eps_A));
    double dev = max_abs_difference(f.f01, f2.f01);
    double scale = max_abs(gf.chi);
    dev = std::max(dev, max_abs(pure.f01));
    if (g.dimension() == 2) {
        dev = std::max({dev, max_abs_difference(f.f02, f2.f02), max_abs_difference(f.f12, f2.f12), max_abs(pure.f02),
                        max_abs(pure.f12)});
    }
    // exact identity; round-off grows like |chi| / eps_A^2 and |A| / eps_A
    double amax = std::max(max_abs(a.a0), max_abs(a.a1));
    if (g.dimension() == 2) amax = std::max(amax, max_abs(a.a2));
    const double units = std::max({1.0, scale / (a.eps_A * a.eps_A), amax / a.eps_A});
    return graded("tensor-invariance", dev, 1e-13 * units, "tolerance 1e-13 in lattice units");
}

}  // namespace detail

/// Runs unitarity, gauge-equivariance, tensor-invariance, continuity and
/// m-identities. A check that throws is reported with status `error`.
inline CheckReport run_checks(const RunConfig& c) {
    CheckReport rep;
    const LatticeGeom g = c.geom();
    const std::size_t n_idx = indices_per_step(c) * c.n_steps;
    auto guarded = [&](const std::string& name, const std::function<CheckResult()>& fn) {
        try {
            rep.checks.push_back(fn());
        } catch (const std::exception& e) {
            rep.checks.push_back({name, CheckStatus::Error, 0.0, 0.0, e.what()});
        }
    };

    const PotentialSpec pot = potential_spec(c);
    const GaugePhases ph = n_idx > 0 ? sample_phases(pot, g, n_idx) : GaugePhases::zero(g, 1);
    WalkerState s0 = initial_state(c, g);
    normalize(s0);

    if (c.dimension == 1) {
        const WalkParams1D params = c.params_1d();
        guarded("unitarity", [&] { return detail::check_unitarity(s0, n_idx, ph, params); });
        guarded("gauge-equivariance", [&] { return detail::check_gauge(c, s0, n_idx, ph, params); });
        guarded("tensor-invariance", [&] { return detail::check_tensor(c, g, n_idx); });
        guarded("continuity", [&] {
            if (n_idx < 1) return CheckResult{"continuity", CheckStatus::Skipped, 0.0, 1e-12, "insufficient steps"};
            double worst = 0.0;
            WalkerState cur = s0;
            for (std::size_t k = 0; k < n_idx; ++k) {
                WalkerState next = step_1d(cur, ph, params);
                const ContinuityReport r = continuity_residual_1d(cur, next, params);
                worst = std::max({worst, r.max_abs, r.probability_drift});
                cur = std::move(next);
            }
            return detail::graded("continuity", worst, 1e-12);
        });
        rep.checks.push_back({"m-identities", CheckStatus::Skipped, 0.0, 1e-13, "two-dimensional walk only"});
    } else {
        const WalkParams2D params = c.params_2d();
        guarded("unitarity", [&] { return detail::check_unitarity(s0, n_idx, ph, params); });
        guarded("gauge-equivariance", [&] { return detail::check_gauge(c, s0, n_idx, ph, params); });
        guarded("tensor-invariance", [&] { return detail::check_tensor(c, g, n_idx); });
        guarded("continuity", [&] {
            if (c.n_steps < 2) return CheckResult{"continuity", CheckStatus::Skipped, 0.0, 1e-12, "insufficient steps"};
            const MSet m = m_set(params.theta1, params.theta2, 1e-12);
            double worst = 0.0;
            std::deque<WalkerState> w{s0};
            const double p0 = total(probability_density(s0));
            for (std::size_t k = 0; k < c.n_steps; ++k) {
                w.push_back(step_2d(w.back(), ph, params));
                if (w.size() > 3) w.pop_front();
                worst = std::max(worst, std::abs(total(probability_density(w.back())) - p0));
                if (w.size() == 3) worst = std::max(worst, continuity_residual(w[0], w[1], w[2], ph, m).max_abs);
            }
            return detail::graded("continuity", worst, 1e-12);
        });
        guarded("m-identities", [&] {
            const MSet m = m_set(params.theta1, params.theta2, 1.0);
            const MSet exact = m_set(kPi / 2, -kPi / 2, 1.0);
            const GammaSet gam = gamma_set(2);
            const double sums = std::max((exact.mx_sum() - gam.current_matrix(1)).cwiseAbs().maxCoeff(),
                                         (exact.my_sum() - gam.current_matrix(2)).cwiseAbs().maxCoeff());
            CheckResult r = detail::graded("m-identities", m.identity_deviation(), 1e-13,
                                           "zeroth-order sums deviate by " + format_double(sums));
            if (sums > 1e-15) r.status = CheckStatus::Fail;
            return r;
        });
    }
    return rep;
}

/// Builds the convergence study from the config's `convergence` block and
/// Gaussian initial state.
inline ConvergenceSetup convergence_setup(const RunConfig& c) {
    if (!c.convergence) throw ConfigError("convergence", "required for converge");
    if (c.initial.kind != InitialKind::Gaussian)
        throw ConfigError("initial_state.type", "convergence needs a gaussian initial state");
    if (c.potential_table) throw ConfigError("potential_table", "convergence needs analytic potentials");
    ConvergenceSetup cs;
    cs.dimension = c.dimension;
    cs.length = c.convergence->length;
    cs.mass = c.mass;
    cs.charge = c.charge;
    cs.potential = potential_spec(c);
    cs.potential.eps_A.reset();  // eps_A follows each eps of the study
    cs.packet = c.initial.packet;
    cs.final_time = c.convergence->final_time;
    cs.eps_list = c.convergence->eps;
    cs.reference_points = c.convergence->reference_points;
    cs.reference_dt = c.convergence->reference_dt;
    return cs;
}

/// Writes convergence.csv (epsilon,l2_error) and slope.txt into `out`.
inline ConvergenceResult run_convergence(const RunConfig& c, const std::filesystem::path& out) {
    const ConvergenceSetup cs = convergence_setup(c);
    const ConvergenceResult r = convergence_study(cs);
    std::filesystem::create_directories(out);
    CsvWriter w(out / "convergence.csv", "epsilon,l2_error");
    for (const auto& row : r.rows) w.row({row.eps, row.l2_error});
    w.close();
    char buf[64];
    std::snprintf(buf, sizeof buf, "slope %.4f\n", r.slope);
    std::ofstream(out / "slope.txt", std::ios::binary) << buf << (r.monotone ? "" : "warning: error sequence is not monotone\n");
    return r;
}

}  // namespace gaugewalk
