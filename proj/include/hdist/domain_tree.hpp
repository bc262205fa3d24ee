#pragma once
//
// Hierarchical 2^d partition of an ideal, uniformly discretized [0,1]^d.
//
// Nodes are stored level by level; inside a level they are in Z-order, so the
// children of node k at level l are nodes 2^d*k .. 2^d*k + 2^d - 1 at level
// l+1.  Discretization points are numbered leaf-major (Z-order over leaves,
// row-major inside a leaf), which makes every node's point set a contiguous
// range of the global vector.
//

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace hdist {

inline constexpr int kMaxDim = 3;

struct DomainConfig {
    int d         = 1;
    int n         = 8;
    int leaf_size = 4;

    /// Throws std::invalid_argument if the configuration is not an ideal domain.
    void validate() const;

    std::int64_t num_points() const;
    /// Number of refinements below the root: log2(n / leaf_size).
    int refinements() const;
};

/// Half-open index box [lo, hi) at a given tree level.
struct IndexBox {
    std::array<int, kMaxDim> lo{};
    std::array<int, kMaxDim> hi{};
    int level = 0;

    int side(int k = 0) const { return hi[k] - lo[k]; }
    std::int64_t dofs(int d) const;
    bool contains(std::span<const int> point, int d) const;
};

bool boxes_intersect(const IndexBox& a, const IndexBox& b, int d);

struct BoxGeometry {
    double diameter = 0.0;
    std::array<double, kMaxDim> center{};
};

/// Geometry of the continuous box covered by `box` inside [0,1]^d.
BoxGeometry box_geometry(const IndexBox& box, const DomainConfig& config);

/// Euclidean distance between the closed continuous boxes (0 when touching).
double box_distance(const IndexBox& a, const IndexBox& b, const DomainConfig& config);

using NodeId = int;
inline constexpr NodeId kNoNode = -1;

class DomainTree {
  public:
    explicit DomainTree(const DomainConfig& config);

    const DomainConfig& config() const { return config_; }
    int dim() const { return config_.d; }
    int children_per_node() const { return 1 << config_.d; }

    /// Number of levels including the root (L + 1).
    int num_levels() const { return static_cast<int>(level_start_.size()) - 1; }
    int leaf_level() const { return num_levels() - 1; }
    std::int64_t num_nodes() const { return level_start_.back(); }
    std::int64_t num_leaves() const { return nodes_at_level(leaf_level()); }
    std::int64_t nodes_at_level(int level) const;

    NodeId root() const { return 0; }
    NodeId node(int level, std::int64_t index_in_level) const;
    int level_of(NodeId id) const;
    std::int64_t index_in_level(NodeId id) const;
    bool is_leaf(NodeId id) const { return level_of(id) == leaf_level(); }

    NodeId parent(NodeId id) const;
    /// Child c in [0, 2^d); kNoNode for leaves.
    NodeId child(NodeId id, int c) const;
    /// Position of `id` among its siblings.
    int child_index(NodeId id) const;

    IndexBox box(NodeId id) const;
    int side(int level) const { return config_.n >> level; }
    std::int64_t dofs(NodeId id) const { return dofs_at_level(level_of(id)); }
    std::int64_t dofs_at_level(int level) const;

    /// First canonical point index covered by the node; its points are
    /// [offset, offset + dofs).
    std::int64_t offset(NodeId id) const { return index_in_level(id) * dofs(id); }

    /// Canonical (leaf-major) position of a grid point.
    std::int64_t canonical_index(std::span<const int> point) const;
    /// Inverse of canonical_index.
    std::array<int, kMaxDim> point_of(std::int64_t canonical) const;

  private:
    DomainConfig config_;
    std::vector<std::int64_t> level_start_;
};

} // namespace hdist
