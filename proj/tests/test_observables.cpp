#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <random>

#include "gaugewalk/dirac.hpp"
#include "gaugewalk/observables.hpp"

using namespace gaugewalk;

namespace {

WalkerState random_state(const LatticeGeom& g, std::uint64_t seed, long j = 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    WalkerState s(g, j);
    for (auto& a : s.amplitudes()) {
        const double re = n(rng);
        a = Complex(re, n(rng));
    }
    normalize(s);
    return s;
}

// Random smooth periodic potential built from a few integer Fourier modes.
PotentialSpec random_smooth_potential(const LatticeGeom& g, std::uint64_t seed, double charge) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double lx = g.extent_x() * g.spacing(), ly = g.extent_y() * g.spacing();
    auto make = [&] {
        std::array<double, 8> c{};
        for (double& v : c) v = u(rng);
        return [c, lx, ly](double t, double x, double y) {
            return 0.5 * c[0] * std::sin(2 * kPi * x / lx + c[1] + c[6] * t) +
                   0.5 * c[2] * std::cos(2 * kPi * y / ly + c[3]) +
                   0.3 * c[4] * std::sin(2 * kPi * (x / lx + y / ly) + c[5] + c[7] * t);
        };
    };
    PotentialSpec p;
    p.a0 = make();
    p.a1 = make();
    p.a2 = make();
    p.charge = charge;
    return p;
}

}  // namespace

TEST(Density, TotalEqualsSquaredNorm) {
    const auto g = LatticeGeom::plane(5, 4, 1.0);
    WalkerState s = random_state(g, 3);
    for (auto& a : s.amplitudes()) a *= 2.0;
    EXPECT_NEAR(total(probability_density(s)), 4.0, 1e-14);
}

TEST(MSet, LambdaIdentitiesAtContinuumFamilyAngles) {
    for (double eps : {0.25, 0.1, 0.01})
        for (double m : {0.0, 1.0, 3.0}) {
            const MSet ms = m_set(WalkParams2D::continuum_family(m, 1.0, eps));
            EXPECT_LE(ms.identity_deviation(), 1e-13);
        }
}

TEST(MSet, LambdaIdentitiesHoldForArbitraryAngles) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2 * kPi, 2 * kPi);
    for (int k = 0; k < 50; ++k) EXPECT_LE(m_set(u(rng), u(rng)).identity_deviation(), 1e-13);
}

TEST(MSet, ZerothOrderSumsAreGammaProducts) {
    const MSet ms = m_set(kPi / 2, -kPi / 2);
    const GammaSet gam = gamma_set(2);
    Mat2 g01, g02;
    g01 << 0, Complex(0, 1), Complex(0, -1), 0;
    g02 << 1, 0, 0, -1;
    EXPECT_LE((gam.current_matrix(1) - g01).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE((gam.current_matrix(2) - g02).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE((ms.mx_sum() - g01).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((ms.my_sum() - g02).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MSet, SumsDriftAtFirstOrderAwayFromExactAngles) {
    const MSet ms = m_set(WalkParams2D::continuum_family(1.0, 1.0, 0.1));
    const double dev = (ms.mx_sum() - gamma_set(2).current_matrix(1)).cwiseAbs().maxCoeff();
    EXPECT_GT(dev, 1e-4);
    EXPECT_LT(dev, 0.1);
}

TEST(Currents, RequireEvenTimeIndexAfterTheFirstStep) {
    const auto g = LatticeGeom::plane(4, 4, 1.0);
    const GaugePhases ph = GaugePhases::zero(g, 6);
    const MSet ms = m_set(kPi / 2, -kPi / 2);
    EXPECT_THROW(current_x(WalkerState(g, 0), ph, ms), ContractError);
    EXPECT_THROW(current_y(WalkerState(g, 3), ph, ms), ContractError);
    EXPECT_NO_THROW(current_x(random_state(g, 1, 2), ph, ms));
    EXPECT_THROW(current_x(WalkerState(LatticeGeom::line(4, 1.0), 2), ph, ms), std::invalid_argument);
}

TEST(Currents, UniformStateGivesContinuumSandwich) {
    // with all neighbours equal and no phases the stencil collapses to psi^dagger (sum M) psi
    const auto g = LatticeGeom::plane(5, 5, 1.0);
    WalkerState s(g, 2);
    const Complex r(0.3, 0.1), l(-0.2, 0.4);
    for (std::size_t p = 0; p < g.sites(); ++p) {
        s.at(p, Coin::R) = r;
        s.at(p, Coin::L) = l;
    }
    const GaugePhases ph = GaugePhases::zero(g, 4);
    const MSet ms = m_set(kPi / 2, -kPi / 2);
    const GammaSet gam = gamma_set(2);
    const Eigen::Vector2cd v(r, l);
    const double jx = (v.adjoint() * gam.current_matrix(1) * v)(0, 0).real();
    const double jy = (v.adjoint() * gam.current_matrix(2) * v)(0, 0).real();
    const CurrentField c = currents(s, ph, ms);
    for (std::size_t p = 0; p < g.sites(); ++p) {
        EXPECT_NEAR(c.jx[p], jx, 1e-15);
        EXPECT_NEAR(c.jy[p], jy, 1e-15);
    }
}

TEST(SymmetricDifference, SumsToZeroOnPeriodicLattice) {
    const auto g = LatticeGeom::plane(6, 5, 1.0);
    RealField f(g);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    for (double& v : f.values) v = u(rng);
    EXPECT_NEAR(total(symmetric_difference(f, Axis::X)), 0.0, 1e-14);
    EXPECT_NEAR(total(symmetric_difference(f, Axis::Y)), 0.0, 1e-14);
    EXPECT_THROW(symmetric_difference(f, Axis::T), std::invalid_argument);
}

TEST(SymmetricDifference, TimeSeriesCoversInteriorSlices) {
    const auto g = LatticeGeom::line(3, 1.0);
    FieldSeries f(g, 4, 5);
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t p = 0; p < 3; ++p) f.at(s, p) = static_cast<double>(s * s);
    const FieldSeries d = symmetric_difference(f, Axis::T);
    EXPECT_EQ(d.slices(), 2u);
    EXPECT_EQ(d.first_index(), 6);
    EXPECT_DOUBLE_EQ(d.at(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(d.at(1, 2), 4.0);
    EXPECT_THROW(symmetric_difference(FieldSeries(g, 2), Axis::T), std::domain_error);
}

TEST(Continuity, ExactOnLargeLatticeWithSmoothFields) {
    for (double eps : {0.25, 0.1})
        for (double m : {0.0, 1.0}) {
            const auto g = LatticeGeom::plane(64, 64, eps);
            const std::size_t steps = 50;
            const GaugePhases ph = sample_phases(random_smooth_potential(g, 17, 1.0), g, 2 * steps);
            const WalkParams2D params = WalkParams2D::continuum_family(m, 1.0, eps);
            const MSet ms = m_set(params);
            GaussianPacket gp{0.5 * 64 * eps, 0.5 * 64 * eps, 6 * eps, 1.0, -0.5, 1.0, Complex(0, 0.5)};
            std::deque<WalkerState> w{gaussian_packet(g, gp)};
            const double p0 = total(probability_density(w.front()));
            double resid = 0.0, drift = 0.0;
            for (std::size_t k = 0; k < steps; ++k) {
                w.push_back(step_2d(w.back(), ph, params));
                if (w.size() > 3) w.pop_front();
                drift = std::max(drift, std::abs(total(probability_density(w.back())) - p0));
                if (w.size() == 3) resid = std::max(resid, continuity_residual(w[0], w[1], w[2], ph, ms).max_abs);
            }
            EXPECT_LE(resid, 1e-12) << "eps " << eps << " m " << m;
            EXPECT_LE(drift, 1e-12) << "eps " << eps << " m " << m;
        }
}

TEST(Continuity, ExactForRandomRoughPhasesAndOddExtents) {
    const auto g = LatticeGeom::plane(7, 5, 0.3);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    GaugePhases ph = GaugePhases::zero(g, 12);
    for (FieldSeries* f : {&ph.alpha, &ph.xi1, &ph.xi2})
        for (double& v : f->values()) v = u(rng);
    const WalkParams2D params{0.3, 1.9, 0.0, 1.0, 0.3};
    const MSet ms = m_set(params);
    const Trajectory t = evolve(random_state(g, 8), 12, ph, params);
    for (std::size_t j = 2; j + 2 <= 12; j += 2)
        EXPECT_LE(continuity_residual(t.states[j - 2], t.states[j], t.states[j + 2], ph, ms).max_abs, 1e-14);
}

TEST(Continuity, WindowMustBeTwoIndicesApart) {
    const auto g = LatticeGeom::plane(4, 4, 1.0);
    const GaugePhases ph = GaugePhases::zero(g, 8);
    const MSet ms = m_set(kPi / 2, -kPi / 2);
    EXPECT_THROW(continuity_residual(WalkerState(g, 1), WalkerState(g, 2), WalkerState(g, 4), ph, ms), ContractError);
}

TEST(Continuity, OneDimensionalLinkFluxBalances) {
    const auto g = LatticeGeom::line(33, 0.1);
    const GaugePhases ph = sample_phases(random_smooth_potential(g, 5, 1.2), g, 40);
    const WalkParams1D params = WalkParams1D::continuum_family(0.8, 1.2, 0.1);
    const Trajectory t = evolve(random_state(g, 6), 40, ph, params);
    for (std::size_t j = 0; j < 40; ++j) {
        const ContinuityReport r = continuity_residual_1d(t.states[j], t.states[j + 1], params);
        EXPECT_LE(r.max_abs, 1e-15);
        EXPECT_LE(r.probability_drift, 1e-14);
    }
    EXPECT_THROW(continuity_residual_1d(t.states[0], t.states[2], params), ContractError);
}

TEST(Continuity, SingleStepDriftIsRoundOff) {
    const auto g = LatticeGeom::plane(8, 8, 0.2);
    const GaugePhases ph = GaugePhases::zero(g, 2);
    const WalkerState a = random_state(g, 1);
    EXPECT_LE(single_step_probability_drift(a, advance(a, ph, WalkParams2D{})), 1e-15);
}
