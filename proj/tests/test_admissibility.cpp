#include "hdist/admissibility.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hdist;

TEST(Admissibility, WeakDisjointHalves) {
    DomainConfig c{1, 8, 1};
    IndexBox a{{0, 0, 0}, {4, 0, 0}, 1};
    IndexBox b{{4, 0, 0}, {8, 0, 0}, 1};
    EXPECT_TRUE(is_admissible(AdmissibilityRule::weak(), a, b, c));
    EXPECT_FALSE(is_admissible(AdmissibilityRule::weak(), a, a, c));
}

TEST(Admissibility, StandardEdgeAndGap) {
    DomainConfig c{2, 8, 1};
    const auto rule = AdmissibilityRule::standard_default(2);
    EXPECT_DOUBLE_EQ(rule.rho, std::sqrt(2.0));
    IndexBox a{{0, 0, 0}, {2, 2, 0}, 2};
    IndexBox edge{{2, 0, 0}, {4, 2, 0}, 2};
    IndexBox gap{{4, 0, 0}, {6, 2, 0}, 2};
    EXPECT_FALSE(is_admissible(rule, a, edge, c));
    // min diam sqrt(2)/4 equals rho * dist = sqrt(2)/4; the boundary case is admissible.
    EXPECT_TRUE(is_admissible(rule, a, gap, c));
}

TEST(Admissibility, DifferentLevelsRejected) {
    DomainConfig c{1, 8, 1};
    IndexBox a{{0, 0, 0}, {4, 0, 0}, 1};
    IndexBox b{{4, 0, 0}, {6, 0, 0}, 2};
    EXPECT_THROW(is_admissible(AdmissibilityRule::weak(), a, b, c), std::invalid_argument);
}

TEST(Admissibility, RootChildPairCounts) {
    const DomainTree t2(DomainConfig{2, 4, 1});
    EXPECT_EQ(count_admissible_child_pairs(AdmissibilityRule::weak(), t2.root(), t2.root(), t2), 12);
    const DomainTree t1(DomainConfig{1, 8, 1});
    EXPECT_EQ(count_admissible_child_pairs(AdmissibilityRule::weak(), t1.root(), t1.root(), t1), 2);
    EXPECT_EQ(count_admissible_child_pairs(AdmissibilityRule::standard(1.0), t1.root(), t1.root(), t1), 0);
    const NodeId leaf = t1.node(t1.leaf_level(), 0);
    EXPECT_THROW(count_admissible_child_pairs(AdmissibilityRule::weak(), leaf, leaf, t1), std::invalid_argument);
}

TEST(Admissibility, Symmetry) {
    for (int d = 1; d <= 3; ++d) {
        const DomainTree tree(DomainConfig{d, d == 3 ? 8 : 16, 1});
        const int level = 2;
        for (const auto& rule : {AdmissibilityRule::weak(), AdmissibilityRule::standard_default(d)})
            for (std::int64_t i = 0; i < tree.nodes_at_level(level); ++i)
                for (std::int64_t j = 0; j < tree.nodes_at_level(level); ++j) {
                    const auto a = tree.box(tree.node(level, i)), b = tree.box(tree.node(level, j));
                    ASSERT_EQ(is_admissible(rule, a, b, tree.config()), is_admissible(rule, b, a, tree.config()));
                }
    }
}

TEST(Admissibility, StandardImpliesWeak) {
    for (int d = 1; d <= 3; ++d) {
        const DomainTree tree(DomainConfig{d, 8, 1});
        const auto standard = AdmissibilityRule::standard_default(d);
        for (int level = 1; level < tree.num_levels(); ++level)
            for (std::int64_t i = 0; i < tree.nodes_at_level(level); ++i)
                for (std::int64_t j = 0; j < tree.nodes_at_level(level); ++j) {
                    const auto a = tree.box(tree.node(level, i)), b = tree.box(tree.node(level, j));
                    if (is_admissible(standard, a, b, tree.config()))
                        ASSERT_TRUE(is_admissible(AdmissibilityRule::weak(), a, b, tree.config()));
                }
    }
}

TEST(Admissibility, StrongEqualsStandardOnIdealTrees) {
    for (int d = 1; d <= 3; ++d) {
        const DomainTree tree(DomainConfig{d, d == 3 ? 8 : 16, 1});
        const double rho = std::sqrt(static_cast<double>(d));
        for (int level = 1; level < tree.num_levels(); ++level)
            for (std::int64_t i = 0; i < tree.nodes_at_level(level); ++i)
                for (std::int64_t j = 0; j < tree.nodes_at_level(level); ++j) {
                    const auto a = tree.box(tree.node(level, i)), b = tree.box(tree.node(level, j));
                    ASSERT_EQ(is_admissible(AdmissibilityRule::standard(rho), a, b, tree.config()),
                              is_strong_admissible(rho, a, b, tree.config()));
                }
    }
}

TEST(Admissibility, InvalidRho) {
    EXPECT_THROW(AdmissibilityRule::standard(0.0), std::invalid_argument);
    EXPECT_THROW(AdmissibilityRule::standard(-1.0), std::invalid_argument);
}
