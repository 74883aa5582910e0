#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "cvgme/trees.hpp"
#include "oracles.hpp"

using namespace cvgme;

TEST(Pruefer, DecoderGivesTrees) {
    const auto e = oracle::pruefer_decode({4, 4}, 4);
    EXPECT_NO_THROW(Tree(4, e));
    EXPECT_EQ(Tree(4, e), Tree(4, {{1, 4}, {2, 4}, {3, 4}}));
}

class EnumerationCount : public ::testing::TestWithParam<int> {};

TEST_P(EnumerationCount, MatchesPrueferOracle) {
    const int n = GetParam();
    EXPECT_EQ(static_cast<int>(enumerate_trees(n).size()), oracle::count_classes_by_pruefer(n));
}

INSTANTIATE_TEST_SUITE_P(Orders, EnumerationCount, ::testing::Range(2, 9));

TEST(Enumeration, KnownCountsAndDistinctness) {
    const std::vector<int> expected{1, 1, 2, 3, 6, 11, 23, 47, 106, 235, 551};
    for (int n = 2; n <= 12; ++n) {
        const auto trees = enumerate_trees(n);
        EXPECT_EQ(static_cast<int>(trees.size()), expected[n - 2]) << "n = " << n;
        std::set<std::string> codes;
        for (const auto& t : trees) codes.insert(oracle::free_tree_code(n, t.edges()));
        EXPECT_EQ(codes.size(), trees.size());
    }
    EXPECT_THROW(enumerate_trees(1), error);
    EXPECT_THROW(enumerate_trees(13), error);
}

TEST(CanonicalCode, InvariantUnderRelabelling) {
    std::mt19937_64 rng(5);
    for (int n = 3; n <= 9; ++n)
        for (const auto& t : enumerate_trees(n)) {
            std::vector<int> perm(n + 1);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin() + 1, perm.end(), rng);
            std::vector<Edge> e;
            for (auto [u, v] : t.edges()) e.emplace_back(perm[u], perm[v]);
            const Tree r(n, e);
            EXPECT_EQ(canonical_code(r), canonical_code(t));
            const Center a = find_center(t), b = find_center(r);
            EXPECT_EQ(a.is_vertex(), b.is_vertex());
            std::set<int> ca{perm[a.first]}, cb{b.first};
            if (!a.is_vertex()) ca.insert(perm[a.second]), cb.insert(b.second);
            EXPECT_EQ(ca, cb);
        }
}

TEST(Center, PathsAndStars) {
    const Center odd = find_center(Tree(5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}}));
    EXPECT_TRUE(odd.is_vertex());
    EXPECT_EQ(odd.first, 3);
    const Center even = find_center(Tree(4, {{1, 2}, {2, 3}, {3, 4}}));
    EXPECT_FALSE(even.is_vertex());
    EXPECT_EQ(std::set<int>({even.first, even.second}), std::set<int>({2, 3}));
}

// Every admissible root of every tree up to order 10.
TEST(Labeling, ReverseLevelOrderAlwaysValidates) {
    for (int n = 2; n <= 10; ++n)
        for (const auto& t : enumerate_trees(n)) {
            const Center c = find_center(t);
            std::vector<int> roots{c.first};
            if (!c.is_vertex()) roots.push_back(c.second);
            for (int root : roots) {
                const auto lab = reverse_level_order_label(t, root);
                EXPECT_TRUE(validate_labeling(lab).ok);
                EXPECT_EQ(canonical_code(lab.tree), canonical_code(t));
            }
        }
}

TEST(Labeling, RejectsNonCentreRoot) {
    const Tree path(5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}});
    EXPECT_THROW(reverse_level_order_label(path, 1), error);
}

TEST(Labeling, FixtureTreesValidateAndAreDistinct) {
    std::set<std::string> codes;
    for (const auto& k : fixture_tree_keys()) {
        const auto lt = fixture_tree(k);
        EXPECT_TRUE(validate_labeling(lt).ok) << k;
        codes.insert(canonical_code(lt.tree));
    }
    EXPECT_EQ(codes.size(), fixture_tree_keys().size());
    EXPECT_THROW(fixture_tree("7z"), error);
}

TEST(Labeling, ParentsOfPathAndFailure) {
    const auto par = parents(fixture_tree("4a"));
    EXPECT_EQ(par, (std::vector<int>{0, 2, 3, 4, 0}));
    // Star centred on vertex 1: column 1 has three nonzeros below it.
    const LabeledTree bad{Tree(4, {{1, 2}, {1, 3}, {1, 4}})};
    const auto chk = validate_labeling(bad);
    EXPECT_FALSE(chk.ok);
    EXPECT_EQ(chk.failing_column, 1);
    try {
        parents(bad);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::structural);
    }
}

TEST(Tree, ValidationErrors) {
    EXPECT_THROW(Tree(3, {{1, 2}}), error);
    EXPECT_THROW(Tree(3, {{1, 2}, {2, 1}}), error);
    EXPECT_THROW(Tree(3, {{1, 2}, {2, 4}}), error);
    EXPECT_THROW(Tree(3, {{1, 1}, {2, 3}}), error);
    EXPECT_THROW(Tree(1, {}), error);
}

TEST(Tree, ParseAndFormatRoundTrip) {
    const Tree t = parse_tree("# star\n4 1\n2 4\n\n3 4  # leaf\n");
    EXPECT_EQ(t, fixture_tree("4b").tree);
    EXPECT_EQ(parse_tree(format_tree(t)), t);
    EXPECT_THROW(parse_tree("1 2\n3\n"), error);
}

TEST(Bipartitions, OrderAndCount) {
    const auto s = bipartitions(3);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].to_string(), "1|23");
    EXPECT_EQ(s[1].to_string(), "12|3");
    EXPECT_EQ(s[2].to_string(), "13|2");
    for (int n = 2; n <= 10; ++n) {
        const auto b = bipartitions(n);
        EXPECT_EQ(b.size(), (std::size_t{1} << (n - 1)) - 1);
        for (const auto& x : b) EXPECT_TRUE(x.in_i(1));
    }
    EXPECT_THROW(bipartitions(1), error);
    try {
        bipartitions(23);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::size_limit);
    }
}
