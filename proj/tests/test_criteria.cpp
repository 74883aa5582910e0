#include <gtest/gtest.h>

#include <random>

#include "cvgme/criteria.hpp"
#include "cvgme/states.hpp"
#include "oracles.hpp"

using namespace cvgme;

// Half-trace convention: U = 1/2 Tr[gamma L L^T], so the vacuum with
// identity coefficients gives N/2 per quadrature.
TEST(LhsU, VacuumIdentityIsHalfN) {
    for (int n = 2; n <= 6; ++n) {
        CholeskyParams p(standard_linear_label(n));
        for (int i = 1; i <= n; ++i) {
            p.set(Quadrature::x, i, i, 1.0);
            p.set(Quadrature::p, i, i, 1.0);
        }
        const auto [ux, up] = lhs_U(CovarianceMatrix::vacuum(n), p);
        EXPECT_DOUBLE_EQ(ux, n / 2.0);
        EXPECT_DOUBLE_EQ(up, n / 2.0);
    }
}

// Explicit two-mode variance per column against the library, 200 cases.
TEST(LhsU, MatchesVarianceExpansion) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + t % 6;
        const auto p = oracle::random_params(rng, n);
        const auto g = CovarianceMatrix::from_full(oracle::random_pure(rng, n));
        double ux = 0.0, up = 0.0;
        for (int i = 1; i <= n; ++i) {
            auto terms = [&](Quadrature q) {
                std::vector<std::pair<int, double>> c{{i - 1, p.get(q, i, i)}};
                if (i < n) c.emplace_back(p.parent(i) - 1, p.get(q, p.parent(i), i));
                return c;
            };
            ux += oracle::half_variance(g.x, terms(Quadrature::x));
            up += oracle::half_variance(g.p, terms(Quadrature::p));
        }
        const auto [lx, lp] = lhs_U(g, p);
        EXPECT_NEAR(lx, ux, 1e-10 * std::max(1.0, ux));
        EXPECT_NEAR(lp, up, 1e-10 * std::max(1.0, up));
    }
}

TEST(RhsTerms, MatchIndexSetOracle) {
    std::mt19937_64 rng(22);
    for (int t = 0; t < 300; ++t) {
        const int n = 2 + t % 6;
        const auto p = oracle::random_params(rng, n, 2.0);
        const Matrix lx = build_L(p, Quadrature::x), lp = build_L(p, Quadrature::p);
        EXPECT_NEAR(script_L(p), oracle::script_L(lx, lp), 1e-10);
        for (const auto& s : bipartitions(n)) {
            EXPECT_NEAR(script_L_k(p, s), oracle::script_L_k(lx, lp, s), 1e-10);
            const double k = oracle::script_K_k(lx, lp, s);
            EXPECT_NEAR(script_K_k(p, s), k, 1e-10);
            EXPECT_NEAR(script_K_k_edge_cut(p, s), k, 1e-10);
        }
    }
}

TEST(Evaluator, SparseGapMatchesDenseReport) {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + t % 6;
        const auto p = oracle::random_params(rng, n, 3.0);
        const auto g = CovarianceMatrix::from_full(oracle::random_pure(rng, n));
        const Evaluator ev(p);
        const auto rep = ev.evaluate(g, p);
        const Vector flat = p.flatten();
        const double tol = 1e-9 * std::max(1.0, std::abs(rep.u_x * rep.u_p));
        EXPECT_NEAR(ev.gap(g, flat, Criterion::product), rep.d_p, tol);
        EXPECT_NEAR(ev.gap(g, flat, Criterion::sum), rep.d_s, tol);
        EXPECT_DOUBLE_EQ(rep.d_s, rep.u_x + rep.u_p - rep.min_K_k());
        EXPECT_DOUBLE_EQ(rep.d_p, rep.u_x * rep.u_p - (rep.script_L + rep.min_L_k()) / 4.0);
    }
}

// L^(12|3) + L^(1|23) = L^(13|2) on the 3-path, up to rounding.
TEST(RhsTerms, ThreeModeAdditivityAndKOrdering) {
    std::mt19937_64 rng(24);
    const auto s = bipartitions(3);
    for (int t = 0; t < 1000; ++t) {
        CholeskyParams p(fixture_tree("3"));
        std::uniform_real_distribution<double> u(-1, 1);
        Vector v(p.dimension());
        for (auto& e : v) e = u(rng);
        p.assign(v);
        const double l1 = script_L_k(p, s[0]), l3 = script_L_k(p, s[1]), l2 = script_L_k(p, s[2]);
        EXPECT_NEAR(l2, l1 + l3, 1e-12);
        const double k1 = script_K_k(p, s[0]), k3 = script_K_k(p, s[1]), k2 = script_K_k(p, s[2]);
        EXPECT_LE(k1, k2 + 1e-12);
        EXPECT_LE(k3, k2 + 1e-12);
    }
}

// Mixtures of states that are product across some split are biseparable:
// neither gap can go negative for any coefficients.
TEST(Soundness, BiseparableMixturesNeverViolate) {
    std::mt19937_64 rng(25);
    for (int t = 0; t < 300; ++t) {
        const int n = 2 + t % 5;
        const auto cm = oracle::random_biseparable(rng, n, 1 + t % 3);
        ASSERT_TRUE(is_physical(cm));
        const auto p = oracle::random_params(rng, n, 2.0);
        const auto rep = evaluate(cm, p);
        EXPECT_GE(rep.d_p, -1e-9 * std::max(1.0, rep.u_x * rep.u_p));
        EXPECT_GE(rep.d_s, -1e-9 * std::max(1.0, rep.u_x + rep.u_p));
    }
}

TEST(Flip, ReportIsInvariantBitForBit) {
    std::mt19937_64 rng(26);
    for (int t = 0; t < 100; ++t) {
        const int n = 3 + t % 4;
        const auto p = oracle::random_params(rng, n);
        const auto g = CovarianceMatrix::from_full(oracle::random_pure(rng, n));
        const int j = 1 + static_cast<int>(rng() % n);
        const auto a = evaluate(g, p), b = evaluate(flip_mode(g, j), flip_mode(p, j));
        EXPECT_EQ(a.d_p, b.d_p);
        EXPECT_EQ(a.d_s, b.d_s);
        EXPECT_EQ(a.script_K_k, b.script_K_k);
    }
}

TEST(Fixtures, TabulatedGaps) {
    EXPECT_NEAR(evaluate(fixture_cm("gamma1"), fixture_params("gamma1-product")).d_p, -0.245, 0.005);
    EXPECT_NEAR(evaluate(fixture_cm("gamma1"), fixture_params("gamma1-sum")).d_s, -0.165, 0.005);
    EXPECT_NEAR(evaluate(fixture_cm("gamma2"), fixture_params("gamma2-sum")).d_s, -0.070, 0.005);
    EXPECT_NEAR(evaluate(fixture_cm("gamma7"), fixture_params("gamma7-product")).d_p, -0.111, 0.005);
    EXPECT_NEAR(evaluate(fixture_cm("gamma4b"), fixture_params("gamma4b-sum")).d_s, -5.36, 0.01);
    // The verbatim four-mode path coefficients give a positive gap.
    EXPECT_GT(evaluate(fixture_cm("gamma4a"), fixture_params("gamma4a-sum-printed")).d_s, 0.0);
}

// K values of the guessed three-mode witness coefficients.
TEST(Fixtures, GuessedWitnessKValues) {
    const auto p = fixture_params("z3-guess");
    const auto s = bipartitions(3); // 1|23, 12|3, 13|2
    const double k1 = script_K_k(p, s[0]), k3 = script_K_k(p, s[1]), k2 = script_K_k(p, s[2]);
    EXPECT_NEAR(k1, 86.0, 1e-3);
    EXPECT_NEAR(k3, 84.0, 1e-3);
    EXPECT_GE(k2, k3);
}

TEST(Params, SupportAndLayout) {
    CholeskyParams p(fixture_tree("4b"));
    EXPECT_EQ(p.dimension(), 14);
    EXPECT_THROW(p.set(Quadrature::x, 2, 1, 1.0), error);
    EXPECT_NO_THROW(p.set(Quadrature::x, 4, 1, 1.0));
    EXPECT_THROW(p.assign(Vector::Zero(3)), error);
    const auto sup = p.support();
    EXPECT_EQ(sup.front(), (std::pair{1, 1}));
    EXPECT_EQ(sup[1], (std::pair{4, 1}));
    Vector v = Vector::LinSpaced(14, 1, 14);
    p.assign(v);
    EXPECT_EQ(p.flatten(), v);
}

TEST(Evaluator, RejectsMismatchedOrders) {
    EXPECT_THROW(evaluate(CovarianceMatrix::vacuum(4), fixture_params("gamma1-sum")), error);
    CholeskyParams p(fixture_tree("3"));
    EXPECT_THROW(script_K_k(p, bipartitions(4)[0]), error);
}
