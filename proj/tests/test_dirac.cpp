#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "gaugewalk/dirac.hpp"

using namespace gaugewalk;

namespace {

DiracConfig line_config(std::size_t n, double length, double dt, double mass = 0.0) {
    DiracConfig c;
    c.dimension = 1;
    c.nx = n;
    c.length_x = length;
    c.dt = dt;
    c.mass = mass;
    return c;
}

// Plane wave e^{i k x} times a fixed spinor.
SpinorField plane_wave(const DiracConfig& cfg, double kx, double ky, Complex a, Complex b) {
    SpinorField f = spinor_field(cfg);
    for (std::size_t p = 0; p < f.points(); ++p) {
        const Complex e = std::polar(1.0, kx * f.x(p) + ky * f.y(p));
        f.c1[p] = e * a;
        f.c2[p] = e * b;
    }
    normalize(f);
    return f;
}

double max_diff(const SpinorField& a, const SpinorField& b) {
    double m = 0.0;
    for (std::size_t p = 0; p < a.points(); ++p)
        m = std::max({m, std::abs(a.c1[p] - b.c1[p]), std::abs(a.c2[p] - b.c2[p])});
    return m;
}

}  // namespace

TEST(Gammas, CliffordRelations) {
    EXPECT_LE(anticommutator_deviation(gamma_set(1)), 1e-15);
    EXPECT_LE(anticommutator_deviation(gamma_set(2)), 1e-15);
    EXPECT_THROW(gamma_set(3), std::invalid_argument);
}

TEST(DiracSolver, ChiralPlaneWaveMovesAtUnitSpeed) {
    const DiracConfig cfg = line_config(32, 4.0, 1e-3);
    const DiracSolver solver(cfg);
    const double k = 2 * kPi * 3 / 4.0;
    SpinorField f = plane_wave(cfg, k, 0, 1.0, 0.0);
    const Complex before = f.c1[5];
    solver.evolve(f, 0.7);
    // residual phase against the wave translated by exactly 0.7
    const double displacement = 0.7 - std::arg(f.c1[5] / (before * std::polar(1.0, -k * 0.7))) / k;
    EXPECT_NEAR(displacement, 0.7, 1e-8);
    for (const auto& v : f.c2) EXPECT_LT(std::abs(v), 1e-14);
}

TEST(DiracSolver, MassiveDispersion1D) {
    const double m = 1.3, k = 2 * kPi * 2 / 4.0;
    const DiracConfig cfg = line_config(16, 4.0, 2e-3, m);
    const DiracSolver solver(cfg);
    // positive-energy eigenvector of k sigma3 + m sigma1
    Eigen::Matrix2cd hk;
    hk << k, m, m, -k;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(hk);
    const Eigen::Vector2cd v = es.eigenvectors().col(1);
    SpinorField f = plane_wave(cfg, k, 0, v(0), v(1));
    const SpinorField f0 = f;
    const double t = 1.0;
    solver.evolve(f, t);
    const double expected = std::sqrt(k * k + m * m);
    const double omega = expected - std::arg(f.c1[3] / (f0.c1[3] * std::polar(1.0, -expected * t))) / t;
    EXPECT_NEAR(omega, expected, 1e-6);
}

TEST(DiracSolver, MassiveDispersion2D) {
    DiracConfig cfg;
    cfg.dimension = 2;
    cfg.nx = cfg.ny = 16;
    cfg.length_x = cfg.length_y = 2.0;
    cfg.mass = 0.7;
    cfg.dt = 2e-3;
    const DiracSolver solver(cfg);
    const double kx = 2 * kPi / 2.0, ky = -2 * kPi * 2 / 2.0;
    // H_k = -i gamma0 gamma^i (i k_i) + m gamma0, the Fourier symbol of the kinetic term
    const Eigen::Matrix2cd hk = kx * Eigen::Matrix2cd(solver.gammas().current_matrix(1)) +
                                ky * Eigen::Matrix2cd(solver.gammas().current_matrix(2)) +
                                cfg.mass * Eigen::Matrix2cd(solver.gammas().gamma[0]);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(hk);
    const Eigen::Vector2cd v = es.eigenvectors().col(1);
    SpinorField f = plane_wave(cfg, kx, ky, v(0), v(1));
    const SpinorField f0 = f;
    solver.evolve(f, 0.5);
    const double expected = std::sqrt(kx * kx + ky * ky + cfg.mass * cfg.mass);
    const double omega = expected - std::arg(f.c1[7] / (f0.c1[7] * std::polar(1.0, -expected * 0.5))) / 0.5;
    EXPECT_NEAR(omega, expected, 1e-6);
}

TEST(DiracSolver, ConstantScalarPotentialIsAUniformPhase) {
    DiracConfig a = line_config(64, 4.0, 1e-3, 0.9);
    DiracConfig b = a;
    b.charge = 1.4;
    b.potential.a0 = [](double, double, double) { return 0.6; };
    const DiracSolver free(a), shifted(b);
    GaussianPacket gp{2.0, 0.0, 0.3, 2.0, 0.0, 1.0, 0.4};
    SpinorField fa = gaussian_spinor_field(a, gp), fb = fa;
    free.evolve(fa, 1.0);
    shifted.evolve(fb, 1.0);
    const Complex rot = std::polar(1.0, -1.4 * 0.6 * 1.0);
    for (auto& v : fa.c1) v *= rot;
    for (auto& v : fa.c2) v *= rot;
    EXPECT_LE(max_diff(fa, fb), 1e-8);
}

TEST(DiracSolver, NormDriftSmallForSmoothFields) {
    DiracConfig cfg = line_config(128, 4.0, 2e-3, 1.0);
    cfg.potential.a0 = [](double t, double x, double) { return 0.5 * std::cos(kPi * x / 2 + t); };
    cfg.potential.a1 = [](double, double x, double) { return std::sin(kPi * x / 2); };
    cfg.potential.time_independent = false;
    const DiracSolver solver(cfg);
    SpinorField f = gaussian_spinor_field(cfg, GaussianPacket{2.0, 0, 0.3, 3.0, 0, 1.0, 0.5});
    solver.evolve(f, 1.0);
    EXPECT_LE(std::abs(spinor_norm(f) - 1.0), 1e-10);
}

TEST(DiracSolver, FourthOrderInTime) {
    DiracConfig cfg = line_config(64, 4.0, 0.02, 1.0);
    cfg.potential.a1 = [](double, double x, double) { return std::sin(kPi * x / 2); };
    const GaussianPacket gp{2.0, 0, 0.4, 1.0, 0, 1.0, 0.5};
    auto run = [&](double dt) {
        DiracConfig c = cfg;
        c.dt = dt;
        SpinorField f = gaussian_spinor_field(c, gp);
        DiracSolver(c).evolve(f, 0.5);
        return f;
    };
    const SpinorField ref = run(0.02 / 16);
    const double e1 = max_diff(run(0.02), ref), e2 = max_diff(run(0.01), ref);
    EXPECT_GT(e1 / e2, 12.0);
    EXPECT_LT(e1 / e2, 20.0);
}

TEST(DiracSolver, UnstableTimeStepRejected) {
    EXPECT_THROW(DiracSolver(line_config(256, 1.0, 0.01)), InstabilityError);
    EXPECT_THROW(DiracSolver(line_config(1, 1.0, 0.01)), std::invalid_argument);
}

TEST(ContinuumCurrent, DensityIsModulusSquared) {
    const DiracConfig cfg = line_config(16, 1.0, 1e-3);
    const SpinorField f = gaussian_spinor_field(cfg, GaussianPacket{0.5, 0, 0.1, 1.0, 0, 1.0, Complex(0.3, 0.2)});
    const ContinuumCurrent j = continuum_current(f, gamma_set(1));
    for (std::size_t p = 0; p < f.points(); ++p)
        EXPECT_NEAR(j.j0[p], std::norm(f.c1[p]) + std::norm(f.c2[p]), 1e-17);
}

TEST(ContinuumCurrent, DivergenceVanishesForEvolvedState) {
    DiracConfig cfg;
    cfg.dimension = 2;
    cfg.nx = cfg.ny = 64;
    cfg.length_x = cfg.length_y = 2.0;
    cfg.mass = 1.0;
    cfg.dt = 2e-3;
    cfg.potential.a0 = [](double, double x, double) { return 0.5 * std::cos(kPi * x); };
    cfg.potential.a1 = [](double, double, double y) { return 0.5 * std::sin(kPi * y); };
    cfg.potential.a2 = [](double, double x, double) { return -0.5 * std::sin(kPi * x); };
    const DiracSolver solver(cfg);
    SpinorField f = gaussian_spinor_field(cfg, GaussianPacket{1.0, 1.0, 0.15, 2.0, 0.0, 1.0, Complex(0, 0.5)});
    solver.evolve(f, 0.2);
    double worst = 0.0;
    for (double v : current_divergence(solver, f)) worst = std::max(worst, std::abs(v));
    EXPECT_LE(worst, 1e-6);
}

TEST(Convergence, SlopeOfExactPowerLaw) {
    EXPECT_NEAR(loglog_slope({0.1, 0.05, 0.025}, {0.3, 0.075, 0.01875}), 2.0, 1e-12);
    EXPECT_THROW(loglog_slope({0.1}, {0.2}), std::invalid_argument);
}

TEST(Convergence, RejectsBadEpsLists) {
    ConvergenceSetup cs;
    cs.length = 4.0;
    cs.eps_list = {0.125, 0.25};
    EXPECT_THROW(convergence_study(cs), std::invalid_argument);
    cs.eps_list = {0.3, 0.15};
    EXPECT_THROW(convergence_study(cs), std::invalid_argument);
    cs.eps_list = {0.25};
    EXPECT_THROW(convergence_study(cs), std::invalid_argument);
}

TEST(Convergence, MasslessFreeOneDimensionalWalkIsExact) {
    // zero angle, zero field: the walk transports each component exactly along a light ray
    ConvergenceSetup cs;
    cs.dimension = 1;
    cs.length = 4.0;
    cs.mass = 0.0;
    cs.packet = GaussianPacket{2.0, 0.0, 0.25, 3.0, 0.0, 1.0, 0.5};
    cs.eps_list = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    cs.reference_dt = 1.0 / 1024;
    const ConvergenceResult r = convergence_study(cs);
    for (const auto& row : r.rows) EXPECT_LT(row.l2_error, 1e-9) << row.eps;
}
