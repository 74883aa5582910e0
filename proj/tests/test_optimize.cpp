#include <gtest/gtest.h>

#include "cvgme/optimize.hpp"
#include "cvgme/states.hpp"

using namespace cvgme;

namespace {

OptimizerConfig quick(int restarts = 8) {
    OptimizerConfig c;
    c.restarts = restarts;
    c.max_iters = 2000;
    c.seed = 3;
    return c;
}

} // namespace

TEST(NelderMead, QuadraticInterior) {
    auto f = [](const Vector& v) { return (v.array() - 0.3).square().sum(); };
    const Vector lo = Vector::Constant(4, -1), hi = Vector::Constant(4, 1);
    const auto r = nelder_mead(f, Vector::Constant(4, -0.9), lo, hi, 0.25, 5000, 1e-14);
    EXPECT_TRUE(r.converged);
    EXPECT_LE((r.x.array() - 0.3).abs().maxCoeff(), 1e-5);
}

TEST(NelderMead, MinimumOnTheBoxFace) {
    auto f = [](const Vector& v) { return (v(0) - 3.0) * (v(0) - 3.0) + v(1) * v(1); };
    const Vector lo = Vector::Constant(2, -1), hi = Vector::Constant(2, 1);
    const auto r = nelder_mead(f, Vector::Zero(2), lo, hi, 0.25, 5000, 1e-14);
    EXPECT_NEAR(r.x(0), 1.0, 1e-9);
    EXPECT_NEAR(r.x(1), 0.0, 1e-4);
    EXPECT_LE(r.x.maxCoeff(), 1.0);
}

TEST(NelderMead, Rosenbrock) {
    auto f = [](const Vector& v) { return 100 * std::pow(v(1) - v(0) * v(0), 2) + std::pow(1 - v(0), 2); };
    const Vector lo = Vector::Constant(2, -2), hi = Vector::Constant(2, 2);
    Vector x0(2);
    x0 << -1.2, 1.0;
    const auto r = nelder_mead(f, x0, lo, hi, 0.5, 20000, 1e-16);
    EXPECT_NEAR(r.x(0), 1.0, 1e-4);
    EXPECT_NEAR(r.x(1), 1.0, 1e-4);
}

TEST(MinimizeGap, DeterministicAcrossThreadCounts) {
    const auto cm = ghz_cm(0.5);
    auto a = quick();
    a.threads = 1;
    auto b = quick();
    b.threads = 4;
    const auto ra = minimize_gap(cm, fixture_tree("3"), Criterion::product, a);
    const auto rb = minimize_gap(cm, fixture_tree("3"), Criterion::product, b);
    EXPECT_EQ(ra.best_value, rb.best_value);
    EXPECT_EQ(ra.best_restart, rb.best_restart);
    EXPECT_EQ(ra.restart_bests, rb.restart_bests);
    EXPECT_EQ(ra.best_params, rb.best_params);
    b.seed = 4;
    EXPECT_NE(minimize_gap(cm, fixture_tree("3"), Criterion::product, b).restart_bests, ra.restart_bests);
}

TEST(MinimizeGap, VerdictFromFreshEvaluation) {
    const auto cm = ghz_cm(1.0);
    const auto r = minimize_gap(cm, fixture_tree("3"), Criterion::product, quick());
    EXPECT_TRUE(r.detected);
    EXPECT_EQ(r.best_value, evaluate(cm, r.best_params).d_p);
    EXPECT_LE(r.best_params.flatten().cwiseAbs().maxCoeff(), 1.0);
    EXPECT_EQ(static_cast<int>(r.restart_bests.size()), 8);
}

TEST(MinimizeGap, VacuumNotDetected) {
    for (auto which : {Criterion::product, Criterion::sum}) {
        const auto r = minimize_gap(CovarianceMatrix::vacuum(4), fixture_tree("4b"), which, quick());
        EXPECT_FALSE(r.detected);
        EXPECT_GE(r.best_value, -1e-9);
    }
}

// The three-mode sum criterion does not see GHZ-type entanglement at any
// squeezing, even though the product criterion does.
TEST(MinimizeGap, SumCriterionMissesGhz) {
    for (double r : {0.5, 1.0, 2.0}) {
        const auto res = minimize_gap(ghz_cm(r), fixture_tree("3"), Criterion::sum, quick());
        EXPECT_FALSE(res.detected);
        EXPECT_GE(res.best_value, -1e-9);
    }
}

TEST(MinimizeGap, WitnessFloorKeepsDiagonalPositive) {
    auto c = quick(4);
    c.witness_floor = true;
    const auto r = minimize_gap(ghz_cm(1.0), fixture_tree("3"), Criterion::sum, c);
    for (auto q : {Quadrature::x, Quadrature::p}) EXPECT_GE(r.best_params.coeffs(q).diag.minCoeff(), c.diag_floor);
}

TEST(MinimizeGap, ConfigAndShapeErrors) {
    auto c = quick();
    c.box = 0.0;
    EXPECT_THROW(minimize_gap(ghz_cm(1.0), fixture_tree("3"), Criterion::sum, c), error);
    EXPECT_THROW(minimize_gap(ghz_cm(1.0), fixture_tree("4a"), Criterion::sum, quick()), error);
}

TEST(Threshold, BisectionTraceAndPrecondition) {
    const auto th = threshold_transmissivity(ghz_cm(1.0), fixture_tree("3"), Criterion::product, quick(4), 0.02);
    ASSERT_GE(th.probes.size(), 2u);
    EXPECT_EQ(th.probes.front().eta, 1.0);
    EXPECT_TRUE(th.probes.front().detected);
    EXPECT_GT(th.eta_min, 0.0);
    EXPECT_LE(th.eta_min, 1.0);
    // The reported threshold was itself probed and detected.
    bool seen = false;
    for (const auto& p : th.probes) seen = seen || (p.eta == th.eta_min && p.detected);
    EXPECT_TRUE(seen);
    EXPECT_THROW(threshold_transmissivity(CovarianceMatrix::vacuum(3), fixture_tree("3"), Criterion::product, quick(2)),
                 error);
}

TEST(Scan, GridAndFactories) {
    const auto pts = scan_squeezing("ghz", fixture_tree("3"), Criterion::product, {0.0, 1.0}, quick());
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_FALSE(pts[0].detected);
    EXPECT_TRUE(pts[1].detected);
    for (const auto& id : state_factory_ids()) EXPECT_NO_THROW(make_state(id, 0.3));
    EXPECT_THROW(make_state("cat", 0.3), error);
}
