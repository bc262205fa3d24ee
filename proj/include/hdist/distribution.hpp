#pragma once
//
// Placement of H-matrix data on process groups and the per-rank local stores.
//
// Low-rank factors are split in block-row fashion: U over the target group,
// V over the source group, each rank holding the rows of its owned points.
// Dense blocks follow one of three layouts depending on which group is a
// singleton.  All communication schedules are pure functions of the block
// structure and the process assignment, so every rank derives the same plan
// without negotiation.
//

#include "hdist/hmatrix.hpp"
#include "hdist/process_tree.hpp"

#include <memory>
#include <vector>

namespace hdist {

enum class Layout {
    LowRankRows,        ///< U rows over the target group, V rows over the source group
    DenseOnSource,      ///< both groups singletons: D on the source rank
    DenseTransposeRows, ///< |Pt| = 1 < |Ps|: D^T row-sharded over the source group
    DenseRows,          ///< |Pt| > 1 = |Ps|: D row-sharded over the target group
};
const char* to_string(Layout layout);

/// Throws std::invalid_argument for a dense block whose groups both have
/// more than one rank.
Layout choose_layout(BlockKind kind, const ProcessGroup& target, const ProcessGroup& source);

struct BlockPlacement {
    int block = -1; ///< index into HMatrixStructure::blocks()
    BlockId id;
    BlockKind kind = BlockKind::Dense;
    int level = 0;
    NodeId target = kNoNode;
    NodeId source = kNoNode;
    ProcessGroup target_group;
    ProcessGroup source_group;
    Layout layout = Layout::DenseOnSource;
    /// Length of the z_local payload moved from source to target side.
    std::int64_t payload_length = 0;

    bool reduced() const { return !source_group.singleton(); }
    bool broadcast() const { return !target_group.singleton(); }
};

/// One placement per dense or low-rank block, level-major then pre-order.
std::vector<BlockPlacement> plan_distribution(const HMatrixStructure& structure, const ProcessAssignment& assignment);

/// Placements packed contiguously for one multi-rank group on one level.
struct Segment {
    int level = 0;
    NodeId node = kNoNode;
    std::int64_t offset = 0; ///< position inside the rank's staging array
    std::int64_t length = 0;
    std::vector<int> placements; ///< indices into DistributionPlan::placements()
};

/// Point-to-point transfer of an array prefix inside a tree stage.
struct Transfer {
    int src = 0;
    int dst = 0;
    std::int64_t length = 0;
};

struct TreeStage {
    int level = 0;
    int stage = 0;
    std::vector<Transfer> transfers;
};

/// All step-3 payloads from one source leader to one target leader.
struct PeerMessage {
    int src = 0;
    int dst = 0;
    std::vector<int> placements;
    std::int64_t length = 0;
};

class DistributionPlan {
  public:
    DistributionPlan(std::shared_ptr<const HMatrixStructure> structure,
                     std::shared_ptr<const ProcessAssignment> assignment);

    const HMatrixStructure& structure() const { return *structure_; }
    const ProcessAssignment& assignment() const { return *assignment_; }
    int num_ranks() const { return assignment_->num_ranks(); }

    const std::vector<BlockPlacement>& placements() const { return placements_; }
    const BlockPlacement& placement(int i) const { return placements_.at(i); }

    /// Staging array layout of a rank on the source (reduce) or target
    /// (broadcast) side: one segment per multi-rank level, root-most first.
    const std::vector<Segment>& reduce_segments(int rank) const { return reduce_segments_.at(rank); }
    const std::vector<Segment>& broadcast_segments(int rank) const { return broadcast_segments_.at(rank); }
    /// Offset of a placement in the rank's staging array, or -1.
    std::int64_t reduce_offset(int rank, int placement) const;
    std::int64_t broadcast_offset(int rank, int placement) const;

    /// Leaf-ward tree reduction stages (deepest level first).
    const std::vector<TreeStage>& reduce_stages() const { return reduce_stages_; }
    /// Root-ward tree broadcast stages (level 1 first).
    const std::vector<TreeStage>& broadcast_stages() const { return broadcast_stages_; }
    /// Step-3 messages sorted by (src, dst).
    const std::vector<PeerMessage>& peer_messages() const { return peer_messages_; }

  private:
    std::vector<TreeStage> tree_stages(bool reduce) const;
    std::vector<std::vector<Segment>> build_segments(bool source_side) const;

    std::shared_ptr<const HMatrixStructure> structure_;
    std::shared_ptr<const ProcessAssignment> assignment_;
    std::vector<BlockPlacement> placements_;
    std::vector<std::vector<Segment>> reduce_segments_;
    std::vector<std::vector<Segment>> broadcast_segments_;
    std::vector<TreeStage> reduce_stages_;
    std::vector<TreeStage> broadcast_stages_;
    std::vector<PeerMessage> peer_messages_;
};

enum class Buffer { Reduce, SourceDirect, Broadcast, TargetDirect };

/// A payload location inside one rank's working buffers.
struct Slot {
    Buffer buffer = Buffer::SourceDirect;
    std::int64_t offset = 0;
    std::int64_t length = 0;
};

struct SourceTask {
    int placement = -1;
    Layout layout = Layout::LowRankRows;
    /// V rows, whole D, or D^T rows; empty for dense pass-through or when the
    /// store was built without data.
    Matrix shard;
    std::int64_t shard_rows = 0;
    std::int64_t shard_cols = 0;
    std::int64_t x_offset = 0; ///< into the rank's x slice
    std::int64_t x_length = 0;
    Slot out;
    std::int64_t flops = 0;
};

struct TargetTask {
    int placement = -1;
    Layout layout = Layout::LowRankRows;
    /// U rows or D rows; empty for dense blocks finished on the source side.
    Matrix shard;
    std::int64_t shard_rows = 0;
    std::int64_t shard_cols = 0;
    std::int64_t y_offset = 0; ///< into the rank's y slice
    std::int64_t y_length = 0;
    Slot in;
    std::int64_t flops = 0;
};

struct TreeOp {
    int peer = 0;
    std::int64_t length = 0;
    bool send = false;
};

struct PeerOp {
    int peer = 0;
    std::vector<int> placements;
    std::vector<Slot> slots;
    std::int64_t length = 0;
};

struct LocalCopy {
    int placement = -1;
    Slot from;
    Slot to;
};

struct StoreOptions {
    /// When false only shapes are recorded; useful for balance studies at
    /// sizes where generating the data is not needed.
    bool materialize = true;
};

struct RankLocalStore {
    int rank = 0;
    OwnedRange owned;
    std::vector<SourceTask> source_tasks; ///< canonical placement order
    std::vector<TargetTask> target_tasks; ///< block pre-order
    std::int64_t reduce_length = 0;
    std::int64_t source_direct_length = 0;
    std::int64_t broadcast_length = 0;
    std::int64_t target_direct_length = 0;
    std::vector<std::vector<TreeOp>> reduce_ops;    ///< per DistributionPlan::reduce_stages() entry
    std::vector<std::vector<TreeOp>> broadcast_ops; ///< per DistributionPlan::broadcast_stages() entry
    std::vector<PeerOp> peer_sends;                 ///< sorted by peer
    std::vector<PeerOp> peer_receives;              ///< sorted by peer
    std::vector<LocalCopy> local_copies;

    std::int64_t stored_scalars() const;
    std::int64_t source_flops() const;
    std::int64_t target_flops() const;
    std::int64_t planned_flops() const { return source_flops() + target_flops(); }
};

RankLocalStore build_local_store(const DistributionPlan& plan, std::uint64_t seed, int rank, StoreOptions options = {});
RankLocalStore build_local_store(const HMatrixConfig& config, const DomainTree& tree,
                                 const ProcessAssignment& assignment, int rank, StoreOptions options = {});

struct DistributedHMatrix {
    HMatrixConfig config;
    std::shared_ptr<const DistributionPlan> plan;
    std::vector<RankLocalStore> stores;

    int num_ranks() const { return static_cast<int>(stores.size()); }
    const ProcessAssignment& assignment() const { return plan->assignment(); }
};

std::shared_ptr<const DistributionPlan> make_plan(const HMatrixConfig& config, int num_ranks);
DistributedHMatrix distribute(const HMatrixConfig& config, int num_ranks, StoreOptions options = {});
DistributedHMatrix distribute(const HMatrixConfig& config, std::shared_ptr<const DistributionPlan> plan,
                              StoreOptions options = {});

struct Balance {
    double max = 0.0;
    double min = 0.0;
    double factor = 1.0;
};

/// Heaviest over lightest per-rank stored scalar count.
Balance measure_balance(const std::vector<RankLocalStore>& stores);
/// Same statistic for an arbitrary per-rank workload.
Balance balance_of(const std::vector<double>& per_rank);

} // namespace hdist
