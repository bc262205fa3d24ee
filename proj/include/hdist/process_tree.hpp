#pragma once
//
// Process groups attached to domain-tree nodes.  Every group is a contiguous
// rank range whose leader is its first rank.
//

#include "hdist/domain_tree.hpp"

#include <cstdint>
#include <vector>

namespace hdist {

struct ProcessGroup {
    int first = 0;
    int size = 1;

    int last() const { return first + size - 1; }
    int leader() const { return first; }
    bool contains(int rank) const { return rank >= first && rank < first + size; }
    bool singleton() const { return size == 1; }

    friend bool operator==(const ProcessGroup&, const ProcessGroup&) = default;
};

struct LevelGroup {
    int level = 0;
    ProcessGroup group;
};

/// Points [begin, end) of the canonical ordering singly owned by one rank.
struct OwnedRange {
    std::int64_t begin = 0;
    std::int64_t end = 0;
    std::int64_t size() const { return end - begin; }
};

class ProcessAssignment {
  public:
    ProcessAssignment(const DomainTree& tree, int num_ranks);

    const DomainTree& tree() const { return tree_; }
    int num_ranks() const { return num_ranks_; }

    const ProcessGroup& group_of(NodeId node) const;
    /// One group per tree level, root first.
    std::vector<LevelGroup> leader_chain(int rank) const;
    /// Group containing `rank` on `level`.
    const ProcessGroup& group_at(int rank, int level) const;
    /// Node of `rank` on `level` when its group there has more than one rank.
    NodeId multi_rank_node(int rank, int level) const;

    /// Maximal subtrees singly owned by `rank`, in canonical order.
    const std::vector<NodeId>& owned_domains(int rank) const;
    const OwnedRange& owned_range(int rank) const;

    /// Deepest level holding a multi-rank group, plus one (0 when P == 1).
    int process_levels() const { return process_levels_; }

  private:
    void assign(NodeId node, ProcessGroup group);
    void check_rank(int rank) const;

    DomainTree tree_;
    int num_ranks_;
    std::vector<ProcessGroup> node_group_;
    std::vector<std::vector<ProcessGroup>> level_groups_; // [level][rank]
    std::vector<std::vector<NodeId>> level_nodes_;        // [level][rank], kNoNode for singletons
    std::vector<std::vector<NodeId>> owned_;
    std::vector<OwnedRange> owned_range_;
    int process_levels_ = 0;
};

inline ProcessAssignment assign_processes(const DomainTree& tree, int num_ranks) {
    return ProcessAssignment(tree, num_ranks);
}

/// Subgroup sizes for children with the given DOFs when children <= group size:
/// largest-remainder rounding, ties to the lower child index, at least one
/// rank per child with positive DOFs.
std::vector<int> proportional_split(int group_size, const std::vector<std::int64_t>& child_dofs);

/// Part index per child when children > group size: contiguous runs balanced
/// by prefix sums, every part non-empty.
std::vector<int> balanced_runs(int parts, const std::vector<std::int64_t>& child_dofs);

} // namespace hdist
