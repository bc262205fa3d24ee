#include "hdist/domain_tree.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

using namespace hdist;

namespace {

DomainTree make_tree(int d, int n, int leaf) { return DomainTree(DomainConfig{d, n, leaf}); }

// Every grid point of a box, in no particular order.
std::vector<std::int64_t> enumerate_points(const DomainTree& tree, NodeId id) {
    const int d = tree.dim();
    const IndexBox b = tree.box(id);
    std::vector<std::int64_t> out;
    std::array<int, kMaxDim> p{};
    for (p[0] = b.lo[0]; p[0] < b.hi[0]; ++p[0])
        for (p[1] = d > 1 ? b.lo[1] : 0; p[1] < (d > 1 ? b.hi[1] : 1); ++p[1])
            for (p[2] = d > 2 ? b.lo[2] : 0; p[2] < (d > 2 ? b.hi[2] : 1); ++p[2])
                out.push_back(tree.canonical_index(std::span<const int>(p.data(), d)));
    return out;
}

} // namespace

TEST(DomainTree, LevelAndNodeCounts) {
    const auto t1 = make_tree(1, 8, 1);
    EXPECT_EQ(t1.num_levels(), 4);
    EXPECT_EQ(t1.num_nodes(), 15);
    EXPECT_EQ(t1.num_leaves(), 8);

    const auto t2 = make_tree(2, 4, 1);
    EXPECT_EQ(t2.num_levels(), 3);
    EXPECT_EQ(t2.num_nodes(), 21);
    EXPECT_EQ(t2.num_leaves(), 16);

    const auto t3 = make_tree(3, 8, 2);
    EXPECT_EQ(t3.num_levels(), 3);
    EXPECT_EQ(t3.num_nodes(), 73);
    EXPECT_EQ(t3.num_leaves(), 64);
}

TEST(DomainTree, RejectsInvalidConfigs) {
    EXPECT_THROW(make_tree(1, 12, 1), std::invalid_argument);
    EXPECT_THROW(make_tree(2, 8, 3), std::invalid_argument);
    EXPECT_THROW(make_tree(4, 8, 1), std::invalid_argument);
    EXPECT_THROW(make_tree(0, 8, 1), std::invalid_argument);
    EXPECT_THROW(make_tree(1, 4, 8), std::invalid_argument);
    EXPECT_THROW(make_tree(1, 0, 1), std::invalid_argument);
}

TEST(DomainTree, BoxGeometry) {
    DomainConfig c2{2, 8, 1};
    IndexBox half{{0, 0, 0}, {4, 4, 0}, 1};
    EXPECT_NEAR(box_geometry(half, c2).diameter, std::sqrt(2.0) / 2, 1e-15);

    DomainConfig c1{1, 8, 1};
    IndexBox quarter{{2, 0, 0}, {4, 0, 0}, 2};
    const auto g1 = box_geometry(quarter, c1);
    EXPECT_DOUBLE_EQ(g1.diameter, 0.25);
    EXPECT_DOUBLE_EQ(g1.center[0], 0.375);

    DomainConfig c3{3, 4, 1};
    IndexBox oct{{2, 0, 2}, {4, 2, 4}, 1};
    EXPECT_NEAR(box_geometry(oct, c3).diameter, std::sqrt(3.0) / 2, 1e-15);
}

TEST(DomainTree, ClosedBoxDistance) {
    DomainConfig c{2, 8, 1};
    IndexBox a{{0, 0, 0}, {2, 2, 0}, 2};
    IndexBox edge{{2, 0, 0}, {4, 2, 0}, 2};
    IndexBox corner{{2, 2, 0}, {4, 4, 0}, 2};
    IndexBox gap{{4, 0, 0}, {6, 2, 0}, 2};
    IndexBox diag{{4, 4, 0}, {6, 6, 0}, 2};
    EXPECT_EQ(box_distance(a, edge, c), 0.0);
    EXPECT_EQ(box_distance(a, corner, c), 0.0);
    EXPECT_DOUBLE_EQ(box_distance(a, gap, c), 0.25);
    EXPECT_NEAR(box_distance(a, diag, c), std::sqrt(2.0) / 4, 1e-15);
}

TEST(DomainTree, ChildrenPartitionParent) {
    for (auto [d, n, leaf] : {std::tuple{1, 16, 1}, {2, 8, 1}, {3, 4, 1}, {2, 16, 2}}) {
        const auto tree = make_tree(d, n, leaf);
        for (NodeId id = 0; id < tree.num_nodes(); ++id) {
            if (tree.is_leaf(id)) {
                EXPECT_EQ(tree.child(id, 0), kNoNode);
                continue;
            }
            auto parent_pts = enumerate_points(tree, id);
            std::multiset<std::int64_t> from_children;
            for (int c = 0; c < tree.children_per_node(); ++c) {
                const NodeId ch = tree.child(id, c);
                EXPECT_EQ(tree.parent(ch), id);
                EXPECT_EQ(tree.child_index(ch), c);
                for (auto p : enumerate_points(tree, ch)) from_children.insert(p);
            }
            std::multiset<std::int64_t> expected(parent_pts.begin(), parent_pts.end());
            EXPECT_EQ(from_children, expected) << "node " << id;
        }
    }
}

TEST(DomainTree, LeavesCoverDomainOnce) {
    for (auto [d, n, leaf] : {std::tuple{1, 32, 2}, {2, 8, 2}, {3, 8, 2}}) {
        const auto tree = make_tree(d, n, leaf);
        std::vector<int> hits(tree.config().num_points(), 0);
        for (std::int64_t k = 0; k < tree.num_leaves(); ++k)
            for (auto p : enumerate_points(tree, tree.node(tree.leaf_level(), k))) ++hits.at(p);
        for (int h : hits) ASSERT_EQ(h, 1);
    }
}

TEST(DomainTree, NodesAreContiguousCanonicalRanges) {
    const auto tree = make_tree(2, 16, 2);
    for (NodeId id = 0; id < tree.num_nodes(); ++id) {
        auto pts = enumerate_points(tree, id);
        std::sort(pts.begin(), pts.end());
        ASSERT_EQ(pts.front(), tree.offset(id));
        ASSERT_EQ(pts.back(), tree.offset(id) + tree.dofs(id) - 1);
        ASSERT_EQ(static_cast<std::int64_t>(pts.size()), tree.dofs(id));
    }
}

TEST(DomainTree, LevelHomogeneity) {
    const auto tree = make_tree(3, 16, 2);
    for (NodeId id = 0; id < tree.num_nodes(); ++id) {
        const auto b = tree.box(id);
        const int level = tree.level_of(id);
        for (int k = 0; k < 3; ++k) ASSERT_EQ(b.side(k), 16 >> level);
        ASSERT_EQ(b.level, level);
    }
    EXPECT_EQ(tree.box(tree.node(tree.leaf_level(), 5)).side(), 2);
}

TEST(DomainTree, CanonicalIndexRoundTrip) {
    const auto tree = make_tree(3, 8, 2);
    for (std::int64_t i = 0; i < tree.config().num_points(); ++i) {
        const auto p = tree.point_of(i);
        ASSERT_EQ(tree.canonical_index(std::span<const int>(p.data(), 3)), i);
    }
    std::array<int, 3> outside{8, 0, 0};
    EXPECT_THROW(tree.canonical_index(std::span<const int>(outside.data(), 3)), std::out_of_range);
}

TEST(DomainTree, OutOfRangeQueries) {
    const auto tree = make_tree(1, 8, 1);
    EXPECT_THROW(tree.level_of(15), std::out_of_range);
    EXPECT_THROW(tree.node(4, 0), std::out_of_range);
    EXPECT_EQ(tree.parent(tree.root()), kNoNode);
}
