#pragma once
//
// Recursive H-matrix over a domain tree, filled with keyed random entries,
// plus the sequential matvec used as the correctness oracle.
//

#include "hdist/admissibility.hpp"
#include "hdist/dense.hpp"
#include "hdist/domain_tree.hpp"

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

namespace hdist {

struct HMatrixConfig {
    DomainConfig domain;
    AdmissibilityRule rule;
    int r = 4;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Identity of a block: the (target, source) node pair on one level.  The
/// pair determines the path of (target-child, source-child) indices from the
/// root pair, and vice versa.
struct BlockId {
    int level = 0;
    std::int64_t target_index = 0; ///< index of the target node within its level
    std::int64_t source_index = 0; ///< index of the source node within its level

    /// Path of (target-child, source-child) pairs from the root pair.
    std::vector<std::pair<int, int>> path(int d) const;
    static BlockId from_path(const std::vector<std::pair<int, int>>& path, int d);
    std::uint64_t key() const;

    friend bool operator==(const BlockId&, const BlockId&) = default;
};

/// Pre-order (target-child outer, source-child inner) comparison.
bool preorder_less(const BlockId& a, const BlockId& b, int d);

enum class BlockKind { Dense, LowRank, Hier };
const char* to_string(BlockKind kind);

struct HBlock {
    BlockId id;
    NodeId target = kNoNode;
    NodeId source = kNoNode;
    BlockKind kind = BlockKind::Hier;
    int parent = -1;
    std::vector<int> children; ///< (2^d)^2 block indices for Hier blocks
};

/// Block structure without numerical data.  Blocks are stored in pre-order.
class HMatrixStructure {
  public:
    HMatrixStructure(const DomainTree& tree, const AdmissibilityRule& rule, int r);

    const DomainTree& tree() const { return tree_; }
    const AdmissibilityRule& rule() const { return rule_; }
    int rank() const { return r_; }

    const std::vector<HBlock>& blocks() const { return blocks_; }
    const HBlock& block(int i) const { return blocks_.at(i); }
    /// Dense and low-rank blocks, in pre-order.
    const std::vector<int>& data_blocks() const { return data_blocks_; }

    std::int64_t rows(const HBlock& b) const { return tree_.dofs(b.target); }
    std::int64_t cols(const HBlock& b) const { return tree_.dofs(b.source); }
    /// Stored scalars of a data block (D, or U and V).
    std::int64_t stored_scalars(const HBlock& b) const;
    std::int64_t flops(const HBlock& b) const;

    int count(BlockKind kind, int level = -1) const;

  private:
    int build(NodeId target, NodeId source, int parent);

    DomainTree tree_;
    AdmissibilityRule rule_;
    int r_;
    std::vector<HBlock> blocks_;
    std::vector<int> data_blocks_;
};

struct BlockData {
    Matrix d; ///< Dense: |target| x |source|
    Matrix u; ///< LowRank: |target| x r
    Matrix v; ///< LowRank: |source| x r
};

/// Entry generators shared by the sequential build and the per-rank shards.
double dense_entry(std::uint64_t seed, const BlockId& id, std::int64_t row, std::int64_t col);
double u_entry(std::uint64_t seed, const BlockId& id, std::int64_t row, std::int64_t k);
double v_entry(std::uint64_t seed, const BlockId& id, std::int64_t row, std::int64_t k);

using DomainVector = std::vector<double>;

class HMatrix {
  public:
    HMatrix(const HMatrixConfig& config, std::shared_ptr<const HMatrixStructure> structure);

    const HMatrixConfig& config() const { return config_; }
    const HMatrixStructure& structure() const { return *structure_; }
    std::shared_ptr<const HMatrixStructure> structure_ptr() const { return structure_; }
    std::int64_t size() const { return structure_->tree().config().num_points(); }

    const BlockData& data(int block) const { return data_.at(block); }
    /// Test hook: direct access to a block's factors.
    BlockData& mutable_data(int block) { return data_.at(block); }

  private:
    HMatrixConfig config_;
    std::shared_ptr<const HMatrixStructure> structure_;
    std::vector<BlockData> data_;
};

std::shared_ptr<const HMatrixStructure> build_structure(const HMatrixConfig& config);
HMatrix build_hmatrix(const HMatrixConfig& config, const DomainTree& tree);
HMatrix build_hmatrix(const HMatrixConfig& config);

/// y = K x accumulated block by block in pre-order.
DomainVector sequential_matvec(const HMatrix& k, std::span<const double> x);

inline constexpr std::int64_t kDefaultDensifyCap = 4096;
Matrix densify(const HMatrix& k, std::int64_t cap = kDefaultDensifyCap);

/// Multiply-add count of sequential_matvec.
std::int64_t flop_count(const HMatrixStructure& structure);
inline std::int64_t flop_count(const HMatrix& k) { return flop_count(k.structure()); }

} // namespace hdist
