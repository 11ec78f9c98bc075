#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "gaugewalk/walk.hpp"
#include "support/dense_oracle.hpp"

using namespace gaugewalk;

namespace {

oracle::Vec to_vec(const WalkerState& s) {
    auto a = s.amplitudes();
    oracle::Vec v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i];
    return v;
}

double max_diff(const WalkerState& s, const oracle::Vec& v) { return (to_vec(s) - v).cwiseAbs().maxCoeff(); }

std::vector<double> slice_vec(const FieldSeries& f, std::size_t s) {
    auto sp = f.slice(s);
    return {sp.begin(), sp.end()};
}

struct Case {
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> u{-kPi, kPi};

    explicit Case(std::uint64_t seed) : rng(seed) {}

    FieldSeries series(const LatticeGeom& g, std::size_t slices) {
        FieldSeries f(g, slices);
        for (double& v : f.values()) v = u(rng);
        return f;
    }
    WalkerState state(const LatticeGeom& g, long j) {
        WalkerState s(g, j);
        for (auto& a : s.amplitudes()) {
            const double re = u(rng);
            a = Complex(re, u(rng));
        }
        return s;
    }
    GaugePhases phases(const LatticeGeom& g, std::size_t slices) {
        GaugePhases p = GaugePhases::zero(g, slices);
        p.alpha = series(g, slices);
        p.xi1 = series(g, slices);
        if (g.dimension() == 2) p.xi2 = series(g, slices);
        return p;
    }
};

// lattices with at most 32 amplitudes
LatticeGeom small_geom(std::mt19937_64& rng, int dim) {
    if (dim == 1) return LatticeGeom::line(2 + rng() % 15, 0.1);
    static const std::pair<std::size_t, std::size_t> shapes[] = {{2, 2}, {2, 3}, {3, 2}, {3, 3}, {2, 4}, {4, 2},
                                                                 {3, 5}, {5, 3}, {4, 4}, {2, 8}, {8, 2}, {2, 5}};
    const auto [nx, ny] = shapes[rng() % std::size(shapes)];
    return LatticeGeom::plane(nx, ny, 0.1);
}

}  // namespace

TEST(DenseOracle, EvolutionKernelsMatchExplicitMatrices) {
    constexpr int kCases = 100;
    double worst = 0.0;
    for (int c = 0; c < kCases; ++c) {
        Case k(1000 + c);
        const int dim = c % 2 == 0 ? 1 : 2;
        const LatticeGeom g = small_geom(k.rng, dim);
        ASSERT_LE(2 * g.sites(), 32u);
        const oracle::Shape shape{g.extent_x(), g.extent_y()};
        const double theta1 = k.u(k.rng), theta2 = k.u(k.rng);

        // coin layer
        const WalkerState s = k.state(g, 0);
        worst = std::max(worst, max_diff(apply_coin(s, coin_matrix(theta1)), oracle::coin_layer(shape, theta1) * to_vec(s)));

        // bare gauged shift along every axis present
        for (int axis = 0; axis < dim; ++axis) {
            const FieldSeries b = k.series(g, 2);
            const auto bm = slice_vec(b, 0), bp = slice_vec(b, 1);
            const WalkerState out = gauged_shift(s, b.slice(0), b.slice(1), axis == 0 ? Axis::X : Axis::Y);
            worst = std::max(worst, max_diff(out, oracle::shift(shape, axis, bm, bp) * to_vec(s)));
        }

        if (dim == 1) {
            const std::size_t n = 3;
            const GaugePhases ph = k.phases(g, n);
            const WalkParams1D params{theta1, 0.0, 1.0, 0.1};
            WalkerState cur = s;
            oracle::Vec v = to_vec(s);
            for (std::size_t j = 0; j < n; ++j) {
                cur = step_1d(cur, ph, params);
                v = oracle::step(shape, 0, theta1, slice_vec(ph.alpha, j), slice_vec(ph.xi1, j), 1.0) * v;
                worst = std::max(worst, max_diff(cur, v));
            }
        } else {
            const std::size_t n = 4;
            const GaugePhases ph = k.phases(g, n);
            const WalkParams2D params{theta1, theta2, 0.0, 1.0, 0.1};
            WalkerState cur = s;
            oracle::Vec v = to_vec(s);
            for (std::size_t j = 0; j < n; j += 2) {
                const WalkerState mid = substep_2d(cur, Axis::X, ph, params);
                const oracle::Vec vm = oracle::step(shape, 0, theta1, slice_vec(ph.alpha, j), slice_vec(ph.xi1, j), 0.5) * v;
                worst = std::max(worst, max_diff(mid, vm));
                const WalkerState two = step_2d(cur, ph, params);
                v = oracle::step(shape, 1, theta2, slice_vec(ph.alpha, j + 1), slice_vec(ph.xi2, j + 1), 0.5) * vm;
                worst = std::max(worst, max_diff(two, v));
                cur = two;
            }
        }
    }
    EXPECT_LE(worst, 1e-14);
}

TEST(DenseOracle, StepOperatorIsUnitary) {
    Case k(7);
    const LatticeGeom g = LatticeGeom::plane(4, 4, 0.1);
    const oracle::Shape shape{4, 4};
    const GaugePhases ph = k.phases(g, 2);
    const oracle::Mat u = oracle::step(shape, 1, 0.9, slice_vec(ph.alpha, 1), slice_vec(ph.xi2, 1), 0.5) *
                          oracle::step(shape, 0, -0.4, slice_vec(ph.alpha, 0), slice_vec(ph.xi1, 0), 0.5);
    EXPECT_LT((u.adjoint() * u - oracle::Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff(), 1e-14);
}

// U' = G_{j+1} U G_j^dagger as an operator identity, one (sub)step at a time.
TEST(DenseOracle, GaugeTransformedStepIsConjugatedStep) {
    for (int dim : {1, 2}) {
        Case k(40 + dim);
        const LatticeGeom g = dim == 1 ? LatticeGeom::line(9, 0.3) : LatticeGeom::plane(3, 4, 0.3);
        const oracle::Shape shape{g.extent_x(), g.extent_y()};
        const std::size_t n = 4;
        const double q = 0.8;
        const GaugePhases ph = k.phases(g, n);
        const FieldSeries chi = k.series(g, n + 1);
        const GaugePhases ph2 = gauge_transform(ph, GaugeFunction{chi}, q);
        const double w = ph.alpha_weight();
        for (std::size_t j = 0; j < n; ++j) {
            const int axis = dim == 1 ? 0 : static_cast<int>(j % 2);
            const double theta = axis == 0 ? 0.7 : -1.1;
            const FieldSeries& xi = axis == 0 ? ph.xi1 : ph.xi2;
            const FieldSeries& xi2 = axis == 0 ? ph2.xi1 : ph2.xi2;
            const oracle::Mat u = oracle::step(shape, axis, theta, slice_vec(ph.alpha, j), slice_vec(xi, j), w);
            const oracle::Mat u2 = oracle::step(shape, axis, theta, slice_vec(ph2.alpha, j), slice_vec(xi2, j), w);
            const oracle::Mat expect = oracle::gauge_rotation(slice_vec(chi, j + 1), q) * u *
                                       oracle::gauge_rotation(slice_vec(chi, j), q).adjoint();
            EXPECT_LT((u2 - expect).cwiseAbs().maxCoeff(), 1e-13) << "dim " << dim << " j " << j;
        }
    }
}
