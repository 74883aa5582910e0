#include <gtest/gtest.h>

#include <random>

#include "cvgme/witness.hpp"
#include "oracles.hpp"

using namespace cvgme;

namespace {

CholeskyParams positive_params(std::mt19937_64& rng, int n) {
    auto p = oracle::random_params(rng, n, 2.0);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (auto q : {Quadrature::x, Quadrature::p})
        for (int i = 1; i <= n; ++i) p.set(q, i, i, u(rng));
    return p;
}

} // namespace

// Tr[gamma Z] = 2 (U^x + U^p) / normalization with the half-trace U.
TEST(Witness, TraceMatchesVarianceSum) {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + t % 5;
        const auto p = positive_params(rng, n);
        const auto w = witness_from_params(p);
        const auto g = CovarianceMatrix::from_full(oracle::random_pure(rng, n));
        const auto [ux, up] = lhs_U(g, p);
        const double expect = 2.0 * (ux + up) / w.normalization;
        EXPECT_NEAR(detects(g, w).trace, expect, 1e-10 * std::max(1.0, expect));
        EXPECT_NEAR(w.normalization, 2.0 * evaluate(g, p).min_K_k(), 1e-12 * w.normalization);
    }
}

// Biseparable bound: Tr[gamma Z] >= 1.
TEST(Witness, BiseparableMixturesNotDetected) {
    std::mt19937_64 rng(32);
    for (int t = 0; t < 300; ++t) {
        const int n = 2 + t % 5;
        const auto w = witness_from_params(positive_params(rng, n));
        const auto cm = oracle::random_biseparable(rng, n, 1 + t % 3, 1.5);
        const auto r = detects(cm, w);
        EXPECT_FALSE(r.detected) << "trace " << r.trace;
        EXPECT_GE(r.trace, 1.0 - 1e-10);
    }
}

TEST(Witness, RejectsNonPositiveDiagonal) {
    CholeskyParams p(fixture_tree("3"));
    EXPECT_THROW(witness_from_params(p), error);
}

// Identity coefficients on three modes: Z = I/6, Tr[Z_W] = 1 exactly.
TEST(Synthesis, BoundaryWitnessIsInfeasible) {
    CholeskyParams p(fixture_tree("3"));
    for (auto q : {Quadrature::x, Quadrature::p})
        for (int i = 1; i <= 3; ++i) p.set(q, i, i, 1.0);
    const auto w = witness_from_params(p);
    EXPECT_DOUBLE_EQ(w.normalization, 6.0);
    try {
        synthesize(w);
        FAIL() << "expected infeasible_error";
    } catch (const infeasible_error& e) {
        EXPECT_NEAR(e.trace(), 1.0, 1e-12);
        EXPECT_EQ(e.code(), errc::construction_infeasible);
    }
}

TEST(Synthesis, FixtureWitnessesGiveDetectedPureStates) {
    for (const auto& key : fixture_witness_keys()) {
        const auto f = fixture_witness(key);
        EXPECT_TRUE(validate_labeling(f.params.tree()).ok);
        const auto s = synthesize(f.witness);
        EXPECT_LT(s.trace_zw, 1.0) << key;
        EXPECT_TRUE(is_physical(s.cm)) << key;
        for (double nu : symplectic_eigenvalues(s.cm)) EXPECT_NEAR(nu, 1.0, 1e-8) << key;
        const auto t = detects(s.cm, f.witness);
        EXPECT_TRUE(t.detected);
        EXPECT_NEAR(t.trace, s.trace_zw, 1e-9);
    }
}

// Witness scale does not move the synthesised state.
TEST(Synthesis, ScaleInvariant) {
    auto w = fixture_witness("4b").witness;
    const auto a = synthesize(w).cm;
    w.x *= 0.5;
    w.p *= 0.5;
    const auto b = synthesize(w).cm;
    EXPECT_LE(std::max((a.x - b.x).cwiseAbs().maxCoeff(), (a.p - b.p).cwiseAbs().maxCoeff()), 1e-9);
}

TEST(Regularize, ReproducesRoundedFixtureExactly) {
    const auto r = round_and_regularize(fixture_cm("gamma3_full"), 2, 0.01);
    const auto ref = fixture_cm("gamma3");
    EXPECT_EQ(r.cm.x, ref.x);
    EXPECT_EQ(r.cm.p, ref.p);
    EXPECT_TRUE(r.physical);
    EXPECT_THROW(round_and_regularize(ref, -1, 0.0), error);
}

TEST(Fixtures, UnknownWitness) { EXPECT_THROW(fixture_witness("5a"), error); }
