#include "hdist/process_tree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hdist {

std::vector<int> proportional_split(int group_size, const std::vector<std::int64_t>& child_dofs) {
    const int c = static_cast<int>(child_dofs.size());
    const std::int64_t total = std::accumulate(child_dofs.begin(), child_dofs.end(), std::int64_t{0});
    if (c == 0 || total <= 0) throw std::invalid_argument("proportional_split needs children with positive DOFs");
    int positive = 0;
    for (auto v : child_dofs) positive += v > 0;
    if (positive > group_size) throw std::invalid_argument("more non-empty children than ranks");

    std::vector<int> sizes(c);
    std::vector<std::int64_t> remainder(c);
    int assigned = 0;
    for (int i = 0; i < c; ++i) {
        const std::int64_t num = static_cast<std::int64_t>(group_size) * child_dofs[i];
        sizes[i] = static_cast<int>(num / total);
        remainder[i] = num % total;
        if (child_dofs[i] > 0 && sizes[i] == 0) {
            sizes[i] = 1;
            remainder[i] = -1; // already rounded up
        }
        assigned += sizes[i];
    }
    // Taking back ranks forced by the at-least-one rule: from the largest
    // subgroup, higher index first.
    while (assigned > group_size) {
        int victim = -1;
        for (int i = c - 1; i >= 0; --i)
            if (sizes[i] > 1 && (victim < 0 || sizes[i] > sizes[victim])) victim = i;
        --sizes[victim];
        --assigned;
    }
    while (assigned < group_size) {
        int best = -1;
        for (int i = 0; i < c; ++i)
            if (child_dofs[i] > 0 && (best < 0 || remainder[i] > remainder[best])) best = i;
        ++sizes[best];
        remainder[best] = -1;
        ++assigned;
        bool any_left = false;
        for (int i = 0; i < c; ++i) any_left |= child_dofs[i] > 0 && remainder[i] >= 0;
        if (!any_left)
            for (int i = 0; i < c; ++i) remainder[i] = child_dofs[i] > 0 ? 0 : -1;
    }
    return sizes;
}

std::vector<int> balanced_runs(int parts, const std::vector<std::int64_t>& child_dofs) {
    const int c = static_cast<int>(child_dofs.size());
    if (parts < 1 || parts > c) throw std::invalid_argument("balanced_runs needs 1 <= parts <= children");
    const std::int64_t total = std::accumulate(child_dofs.begin(), child_dofs.end(), std::int64_t{0});
    if (total <= 0) throw std::invalid_argument("balanced_runs needs positive DOFs");
    std::vector<int> part(c);
    std::int64_t prefix = 0;
    for (int i = 0; i < c; ++i) {
        // Child i goes to the part containing the midpoint of its DOF interval.
        const std::int64_t mid2 = 2 * prefix + child_dofs[i];
        int p = static_cast<int>((static_cast<std::int64_t>(parts) * mid2) / (2 * total));
        const int prev = i == 0 ? 0 : part[i - 1];
        const int lo = std::max(prev, parts - (c - i));
        const int hi = i == 0 ? 0 : std::min(prev + 1, parts - 1);
        part[i] = std::clamp(p, lo, hi);
        prefix += child_dofs[i];
    }
    return part;
}

ProcessAssignment::ProcessAssignment(const DomainTree& tree, int num_ranks) : tree_(tree), num_ranks_(num_ranks) {
    if (num_ranks < 1) throw std::invalid_argument("process count must be >= 1");
    if (num_ranks > tree.num_leaves())
        throw std::invalid_argument("process count " + std::to_string(num_ranks) + " exceeds leaf count " +
                                    std::to_string(tree.num_leaves()));
    node_group_.assign(static_cast<std::size_t>(tree.num_nodes()), ProcessGroup{});
    level_groups_.assign(tree.num_levels(), std::vector<ProcessGroup>(num_ranks));
    level_nodes_.assign(tree.num_levels(), std::vector<NodeId>(num_ranks, kNoNode));
    owned_.resize(num_ranks);
    assign(tree.root(), ProcessGroup{0, num_ranks});

    owned_range_.resize(num_ranks);
    std::int64_t expected = 0;
    for (int p = 0; p < num_ranks; ++p) {
        const auto& nodes = owned_[p];
        if (nodes.empty()) throw std::logic_error("rank " + std::to_string(p) + " owns no subdomain");
        OwnedRange range{tree.offset(nodes.front()), tree.offset(nodes.front())};
        for (NodeId id : nodes) {
            if (tree.offset(id) != range.end) throw std::logic_error("owned subdomains are not contiguous");
            range.end += tree.dofs(id);
        }
        if (range.begin != expected) throw std::logic_error("owned ranges are not in rank order");
        expected = range.end;
        owned_range_[p] = range;
    }
    for (int l = tree.num_levels() - 1; l >= 0; --l) {
        bool multi = false;
        for (const auto& g : level_groups_[l]) multi |= !g.singleton();
        if (multi) {
            process_levels_ = l + 1;
            break;
        }
    }
}

void ProcessAssignment::assign(NodeId node, ProcessGroup group) {
    node_group_[node] = group;
    const int level = tree_.level_of(node);
    for (int r = group.first; r <= group.last(); ++r) {
        level_groups_[level][r] = group;
        if (!group.singleton()) level_nodes_[level][r] = node;
    }
    if (group.singleton()) {
        const NodeId parent = tree_.parent(node);
        if (parent == kNoNode || !node_group_[parent].singleton()) owned_[group.first].push_back(node);
    }
    if (tree_.is_leaf(node)) {
        if (!group.singleton()) throw std::logic_error("leaf assigned to a multi-rank group");
        return;
    }
    const int c = tree_.children_per_node();
    if (group.singleton()) {
        for (int i = 0; i < c; ++i) assign(tree_.child(node, i), group);
        return;
    }
    std::vector<std::int64_t> dofs(c);
    for (int i = 0; i < c; ++i) dofs[i] = tree_.dofs(tree_.child(node, i));
    if (c <= group.size) {
        const auto sizes = proportional_split(group.size, dofs);
        int first = group.first;
        for (int i = 0; i < c; ++i) {
            assign(tree_.child(node, i), ProcessGroup{first, sizes[i]});
            first += sizes[i];
        }
    } else {
        const auto part = balanced_runs(group.size, dofs);
        for (int i = 0; i < c; ++i) assign(tree_.child(node, i), ProcessGroup{group.first + part[i], 1});
    }
}

void ProcessAssignment::check_rank(int rank) const {
    if (rank < 0 || rank >= num_ranks_) throw std::out_of_range("rank " + std::to_string(rank) + " out of range");
}

const ProcessGroup& ProcessAssignment::group_of(NodeId node) const {
    if (node < 0 || node >= tree_.num_nodes()) throw std::out_of_range("unknown domain node " + std::to_string(node));
    return node_group_[node];
}

std::vector<LevelGroup> ProcessAssignment::leader_chain(int rank) const {
    check_rank(rank);
    std::vector<LevelGroup> chain;
    chain.reserve(tree_.num_levels());
    for (int l = 0; l < tree_.num_levels(); ++l) chain.push_back({l, level_groups_[l][rank]});
    return chain;
}

const ProcessGroup& ProcessAssignment::group_at(int rank, int level) const {
    check_rank(rank);
    return level_groups_.at(level)[rank];
}

NodeId ProcessAssignment::multi_rank_node(int rank, int level) const {
    check_rank(rank);
    return level_nodes_.at(level)[rank];
}

const std::vector<NodeId>& ProcessAssignment::owned_domains(int rank) const {
    check_rank(rank);
    return owned_[rank];
}

const OwnedRange& ProcessAssignment::owned_range(int rank) const {
    check_rank(rank);
    return owned_range_[rank];
}

} // namespace hdist
