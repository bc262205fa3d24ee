#include "hdist/distribution.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace hdist {

const char* to_string(Layout layout) {
    switch (layout) {
    case Layout::LowRankRows: return "lowrank_rows";
    case Layout::DenseOnSource: return "dense_on_source";
    case Layout::DenseTransposeRows: return "dense_transpose_rows";
    case Layout::DenseRows: return "dense_rows";
    }
    return "?";
}

Layout choose_layout(BlockKind kind, const ProcessGroup& target, const ProcessGroup& source) {
    if (kind == BlockKind::LowRank) return Layout::LowRankRows;
    if (kind != BlockKind::Dense) throw std::invalid_argument("hierarchical blocks carry no data to place");
    if (target.singleton() && source.singleton()) return Layout::DenseOnSource;
    if (target.singleton()) return Layout::DenseTransposeRows;
    if (source.singleton()) return Layout::DenseRows;
    throw std::invalid_argument("dense block with multi-rank target and source groups");
}

std::vector<BlockPlacement> plan_distribution(const HMatrixStructure& structure, const ProcessAssignment& assignment) {
    const auto& tree = structure.tree();
    std::vector<BlockPlacement> out;
    out.reserve(structure.data_blocks().size());
    for (int bi : structure.data_blocks()) {
        const HBlock& b = structure.block(bi);
        BlockPlacement p;
        p.block = bi;
        p.id = b.id;
        p.kind = b.kind;
        p.level = b.id.level;
        p.target = b.target;
        p.source = b.source;
        p.target_group = assignment.group_of(b.target);
        p.source_group = assignment.group_of(b.source);
        p.layout = choose_layout(b.kind, p.target_group, p.source_group);
        switch (p.layout) {
        case Layout::LowRankRows: p.payload_length = structure.rank(); break;
        case Layout::DenseOnSource:
        case Layout::DenseTransposeRows: p.payload_length = tree.dofs(b.target); break;
        case Layout::DenseRows: p.payload_length = tree.dofs(b.source); break;
        }
        out.push_back(p);
    }
    // Blocks are already in pre-order; a stable sort makes the list level-major.
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.level < b.level; });
    return out;
}

DistributionPlan::DistributionPlan(std::shared_ptr<const HMatrixStructure> structure,
                                   std::shared_ptr<const ProcessAssignment> assignment)
    : structure_(std::move(structure)), assignment_(std::move(assignment)) {
    const auto& st = structure_->tree();
    const auto& at = assignment_->tree();
    if (st.config().d != at.config().d || st.config().n != at.config().n ||
        st.config().leaf_size != at.config().leaf_size)
        throw std::invalid_argument("structure and assignment are built on different domain trees");

    placements_ = plan_distribution(*structure_, *assignment_);
    for (const auto& p : placements_)
        if (p.level == 0 && (p.reduced() || p.broadcast()))
            throw std::logic_error("root-level block needs tree communication");

    reduce_segments_ = build_segments(true);
    broadcast_segments_ = build_segments(false);
    reduce_stages_ = tree_stages(true);
    broadcast_stages_ = tree_stages(false);

    std::map<std::pair<int, int>, PeerMessage> peers;
    for (int i = 0; i < static_cast<int>(placements_.size()); ++i) {
        const auto& p = placements_[i];
        const int src = p.source_group.leader(), dst = p.target_group.leader();
        if (src == dst) continue;
        auto& m = peers[{src, dst}];
        m.src = src;
        m.dst = dst;
        m.placements.push_back(i);
        m.length += p.payload_length;
    }
    peer_messages_.reserve(peers.size());
    for (auto& [key, m] : peers) peer_messages_.push_back(std::move(m));
}

std::vector<std::vector<Segment>> DistributionPlan::build_segments(bool source_side) const {
    const auto& tree = structure_->tree();
    const auto& asg = *assignment_;
    // Segment contents depend only on the node; ranks of one group share them.
    std::unordered_map<NodeId, Segment> by_node;
    for (int i = 0; i < static_cast<int>(placements_.size()); ++i) {
        const auto& p = placements_[i];
        if (source_side ? !p.reduced() : !p.broadcast()) continue;
        const NodeId node = source_side ? p.source : p.target;
        auto& seg = by_node[node];
        seg.level = p.level;
        seg.node = node;
        seg.placements.push_back(i);
        seg.length += p.payload_length;
    }
    std::vector<std::vector<Segment>> out(asg.num_ranks());
    for (int rank = 0; rank < asg.num_ranks(); ++rank) {
        std::int64_t offset = 0;
        for (int level = 1; level < tree.num_levels(); ++level) {
            const NodeId node = asg.multi_rank_node(rank, level);
            if (node == kNoNode) break;
            Segment seg;
            if (auto it = by_node.find(node); it != by_node.end()) seg = it->second;
            seg.level = level;
            seg.node = node;
            seg.offset = offset;
            offset += seg.length;
            out[rank].push_back(std::move(seg));
        }
    }
    return out;
}

namespace {

std::int64_t offset_in(const std::vector<Segment>& segments, const std::vector<BlockPlacement>& placements,
                       int placement) {
    const auto& p = placements.at(placement);
    for (const auto& seg : segments) {
        if (seg.level != p.level) continue;
        std::int64_t off = seg.offset;
        for (int q : seg.placements) {
            if (q == placement) return off;
            off += placements[q].payload_length;
        }
        return -1;
    }
    return -1;
}

std::int64_t prefix_length(const std::vector<Segment>& segments, int level) {
    std::int64_t len = 0;
    for (const auto& seg : segments)
        if (seg.level <= level) len += seg.length;
    return len;
}

} // namespace

std::int64_t DistributionPlan::reduce_offset(int rank, int placement) const {
    return offset_in(reduce_segments_.at(rank), placements_, placement);
}

std::int64_t DistributionPlan::broadcast_offset(int rank, int placement) const {
    return offset_in(broadcast_segments_.at(rank), placements_, placement);
}

std::vector<TreeStage> DistributionPlan::tree_stages(bool reduce) const {
    const auto& tree = structure_->tree();
    const auto& asg = *assignment_;
    const int deepest = asg.process_levels() - 1;
    const int c = tree.children_per_node();
    const int max_stage = std::bit_width(static_cast<unsigned>(c)) - 1; // stages 0 .. max_stage-1

    std::vector<TreeStage> out;
    auto emit_level = [&](int level) {
        std::vector<TreeStage> stages(max_stage);
        for (int s = 0; s < max_stage; ++s) {
            stages[s].level = level;
            stages[s].stage = s;
        }
        for (std::int64_t k = 0; k < tree.nodes_at_level(level); ++k) {
            const NodeId node = tree.node(level, k);
            const ProcessGroup& g = asg.group_of(node);
            if (g.singleton()) continue;
            std::vector<int> participants;
            for (int i = 0; i < c; ++i) {
                const int leader = asg.group_of(tree.child(node, i)).leader();
                if (participants.empty() || participants.back() != leader) participants.push_back(leader);
            }
            const auto& segs = reduce ? reduce_segments_[g.leader()] : broadcast_segments_[g.leader()];
            const std::int64_t len = prefix_length(segs, level);
            if (len == 0) continue;
            const int n = static_cast<int>(participants.size());
            for (int s = 0; (1 << s) < n; ++s) {
                const int step = 1 << s;
                for (int i = 0; i < n; ++i) {
                    if (reduce && i % (2 * step) == step)
                        stages[s].transfers.push_back({participants[i], participants[i - step], len});
                    if (!reduce && i % (2 * step) == 0 && i + step < n)
                        stages[s].transfers.push_back({participants[i], participants[i + step], len});
                }
            }
        }
        if (reduce) {
            for (int s = 0; s < max_stage; ++s)
                if (!stages[s].transfers.empty()) out.push_back(std::move(stages[s]));
        } else {
            for (int s = max_stage - 1; s >= 0; --s)
                if (!stages[s].transfers.empty()) out.push_back(std::move(stages[s]));
        }
    };
    if (reduce)
        for (int level = deepest; level >= 1; --level) emit_level(level);
    else
        for (int level = 1; level <= deepest; ++level) emit_level(level);
    return out;
}

std::int64_t RankLocalStore::stored_scalars() const {
    std::int64_t total = 0;
    for (const auto& t : source_tasks) total += t.shard_rows * t.shard_cols;
    for (const auto& t : target_tasks) total += t.shard_rows * t.shard_cols;
    return total;
}

std::int64_t RankLocalStore::source_flops() const {
    std::int64_t total = 0;
    for (const auto& t : source_tasks) total += t.flops;
    return total;
}

std::int64_t RankLocalStore::target_flops() const {
    std::int64_t total = 0;
    for (const auto& t : target_tasks) total += t.flops;
    return total;
}

namespace {

struct Range {
    std::int64_t begin = 0;
    std::int64_t end = 0;
};

Range intersect(const OwnedRange& owned, std::int64_t begin, std::int64_t length) {
    return {std::max(owned.begin, begin), std::min(owned.end, begin + length)};
}

} // namespace

RankLocalStore build_local_store(const DistributionPlan& plan, std::uint64_t seed, int rank, StoreOptions options) {
    const auto& structure = plan.structure();
    const auto& tree = structure.tree();
    const auto& asg = plan.assignment();
    const int r = structure.rank();
    if (rank < 0 || rank >= plan.num_ranks()) throw std::out_of_range("rank " + std::to_string(rank) + " out of range");

    RankLocalStore store;
    store.rank = rank;
    store.owned = asg.owned_range(rank);
    for (const auto& seg : plan.reduce_segments(rank)) store.reduce_length += seg.length;
    for (const auto& seg : plan.broadcast_segments(rank)) store.broadcast_length += seg.length;

    std::unordered_map<int, Slot> source_slot, target_slot;
    const auto& placements = plan.placements();
    for (int pi = 0; pi < static_cast<int>(placements.size()); ++pi) {
        const BlockPlacement& p = placements[pi];
        const std::int64_t t_off = tree.offset(p.target), t_len = tree.dofs(p.target);
        const std::int64_t s_off = tree.offset(p.source), s_len = tree.dofs(p.source);

        bool on_source = false;
        switch (p.layout) {
        case Layout::LowRankRows:
        case Layout::DenseTransposeRows: on_source = p.source_group.contains(rank); break;
        case Layout::DenseOnSource:
        case Layout::DenseRows: on_source = p.source_group.leader() == rank; break;
        }
        if (on_source) {
            SourceTask task;
            task.placement = pi;
            task.layout = p.layout;
            const Range cols = intersect(store.owned, s_off, s_len);
            task.x_offset = cols.begin - store.owned.begin;
            task.x_length = cols.end - cols.begin;
            const std::int64_t local = cols.begin - s_off;
            switch (p.layout) {
            case Layout::LowRankRows:
                task.shard_rows = task.x_length;
                task.shard_cols = r;
                task.flops = 2 * task.x_length * r;
                break;
            case Layout::DenseOnSource:
                task.shard_rows = t_len;
                task.shard_cols = s_len;
                task.flops = 2 * t_len * s_len;
                break;
            case Layout::DenseTransposeRows:
                task.shard_rows = task.x_length;
                task.shard_cols = t_len;
                task.flops = 2 * task.x_length * t_len;
                break;
            case Layout::DenseRows: break;
            }
            if (options.materialize && task.shard_rows * task.shard_cols > 0) {
                task.shard = Matrix(task.shard_rows, task.shard_cols);
                for (std::int64_t i = 0; i < task.shard_rows; ++i)
                    for (std::int64_t j = 0; j < task.shard_cols; ++j) {
                        double v = 0.0;
                        if (p.layout == Layout::LowRankRows) v = v_entry(seed, p.id, local + i, j);
                        else if (p.layout == Layout::DenseOnSource) v = dense_entry(seed, p.id, i, j);
                        else v = dense_entry(seed, p.id, j, local + i);
                        task.shard(i, j) = v;
                    }
            }
            if (p.reduced()) {
                task.out = {Buffer::Reduce, plan.reduce_offset(rank, pi), p.payload_length};
                if (task.out.offset < 0) throw std::logic_error("reduced placement missing from staging array");
            } else {
                task.out = {Buffer::SourceDirect, store.source_direct_length, p.payload_length};
                store.source_direct_length += p.payload_length;
            }
            source_slot[pi] = task.out;
            store.source_tasks.push_back(std::move(task));
        }

        bool on_target = false;
        switch (p.layout) {
        case Layout::LowRankRows:
        case Layout::DenseRows: on_target = p.target_group.contains(rank); break;
        case Layout::DenseOnSource:
        case Layout::DenseTransposeRows: on_target = p.target_group.leader() == rank; break;
        }
        if (on_target) {
            TargetTask task;
            task.placement = pi;
            task.layout = p.layout;
            const Range rows = intersect(store.owned, t_off, t_len);
            task.y_offset = rows.begin - store.owned.begin;
            task.y_length = rows.end - rows.begin;
            const std::int64_t local = rows.begin - t_off;
            if (p.layout == Layout::LowRankRows) {
                task.shard_rows = task.y_length;
                task.shard_cols = r;
                task.flops = 2 * task.y_length * r;
            } else if (p.layout == Layout::DenseRows) {
                task.shard_rows = task.y_length;
                task.shard_cols = s_len;
                task.flops = 2 * task.y_length * s_len;
            }
            if (options.materialize && task.shard_rows * task.shard_cols > 0) {
                task.shard = Matrix(task.shard_rows, task.shard_cols);
                for (std::int64_t i = 0; i < task.shard_rows; ++i)
                    for (std::int64_t j = 0; j < task.shard_cols; ++j)
                        task.shard(i, j) = p.layout == Layout::LowRankRows ? u_entry(seed, p.id, local + i, j)
                                                                           : dense_entry(seed, p.id, local + i, j);
            }
            if (p.broadcast()) {
                task.in = {Buffer::Broadcast, plan.broadcast_offset(rank, pi), p.payload_length};
                if (task.in.offset < 0) throw std::logic_error("broadcast placement missing from staging array");
            } else {
                task.in = {Buffer::TargetDirect, store.target_direct_length, p.payload_length};
                store.target_direct_length += p.payload_length;
            }
            target_slot[pi] = task.in;
            store.target_tasks.push_back(std::move(task));
        }

        if (p.source_group.leader() == rank && p.target_group.leader() == rank)
            store.local_copies.push_back({pi, source_slot.at(pi), target_slot.at(pi)});
    }
    // Accumulation into y follows the block pre-order of the sequential matvec.
    std::stable_sort(store.target_tasks.begin(), store.target_tasks.end(), [&](const auto& a, const auto& b) {
        return placements[a.placement].block < placements[b.placement].block;
    });

    for (const auto& m : plan.peer_messages()) {
        if (m.src == rank) {
            PeerOp op{m.dst, m.placements, {}, m.length};
            for (int pi : m.placements) op.slots.push_back(source_slot.at(pi));
            store.peer_sends.push_back(std::move(op));
        }
        if (m.dst == rank) {
            PeerOp op{m.src, m.placements, {}, m.length};
            for (int pi : m.placements) op.slots.push_back(target_slot.at(pi));
            store.peer_receives.push_back(std::move(op));
        }
    }
    std::sort(store.peer_receives.begin(), store.peer_receives.end(),
              [](const auto& a, const auto& b) { return a.peer < b.peer; });

    auto collect = [rank](const std::vector<TreeStage>& stages) {
        std::vector<std::vector<TreeOp>> ops(stages.size());
        for (std::size_t i = 0; i < stages.size(); ++i)
            for (const auto& t : stages[i].transfers) {
                if (t.src == rank) ops[i].push_back({t.dst, t.length, true});
                if (t.dst == rank) ops[i].push_back({t.src, t.length, false});
            }
        return ops;
    };
    store.reduce_ops = collect(plan.reduce_stages());
    store.broadcast_ops = collect(plan.broadcast_stages());
    return store;
}

std::shared_ptr<const DistributionPlan> make_plan(const HMatrixConfig& config, int num_ranks) {
    auto structure = build_structure(config);
    auto assignment = std::make_shared<const ProcessAssignment>(structure->tree(), num_ranks);
    return std::make_shared<const DistributionPlan>(std::move(structure), std::move(assignment));
}

RankLocalStore build_local_store(const HMatrixConfig& config, const DomainTree& tree,
                                 const ProcessAssignment& assignment, int rank, StoreOptions options) {
    auto structure = std::make_shared<const HMatrixStructure>(tree, config.rule, config.r);
    auto asg = std::make_shared<const ProcessAssignment>(assignment);
    const DistributionPlan plan(std::move(structure), std::move(asg));
    return build_local_store(plan, config.seed, rank, options);
}

DistributedHMatrix distribute(const HMatrixConfig& config, std::shared_ptr<const DistributionPlan> plan,
                              StoreOptions options) {
    DistributedHMatrix out;
    out.config = config;
    out.plan = std::move(plan);
    out.stores.reserve(out.plan->num_ranks());
    for (int p = 0; p < out.plan->num_ranks(); ++p)
        out.stores.push_back(build_local_store(*out.plan, config.seed, p, options));
    return out;
}

DistributedHMatrix distribute(const HMatrixConfig& config, int num_ranks, StoreOptions options) {
    return distribute(config, make_plan(config, num_ranks), options);
}

Balance balance_of(const std::vector<double>& per_rank) {
    if (per_rank.empty()) throw std::invalid_argument("balance needs at least one rank");
    const auto [lo, hi] = std::minmax_element(per_rank.begin(), per_rank.end());
    Balance b{*hi, *lo, 1.0};
    if (*lo > 0.0) b.factor = *hi / *lo;
    else if (*hi > 0.0) b.factor = std::numeric_limits<double>::infinity();
    return b;
}

Balance measure_balance(const std::vector<RankLocalStore>& stores) {
    if (stores.empty()) throw std::invalid_argument("measure_balance needs at least one store");
    std::vector<double> load;
    load.reserve(stores.size());
    for (const auto& s : stores) load.push_back(static_cast<double>(s.stored_scalars()));
    return balance_of(load);
}

} // namespace hdist
