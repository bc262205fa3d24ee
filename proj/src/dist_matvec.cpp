#include "hdist/dist_matvec.hpp"

#include <algorithm>
#include <string>

namespace hdist {

namespace {

void check_slices(const DistributedVector& v, const DistributedHMatrix& k, const char* what) {
    if (v.num_ranks() != k.num_ranks())
        throw std::invalid_argument(std::string(what) + " has " + std::to_string(v.num_ranks()) + " slices for " +
                                    std::to_string(k.num_ranks()) + " ranks");
    for (int p = 0; p < k.num_ranks(); ++p)
        if (static_cast<std::int64_t>(v.slices[p].size()) != k.stores[p].owned.size())
            throw std::invalid_argument(std::string(what) + " slice " + std::to_string(p) + " has length " +
                                        std::to_string(v.slices[p].size()) + ", owned range has " +
                                        std::to_string(k.stores[p].owned.size()));
}

void require_shard(const Matrix& shard, std::int64_t rows, std::int64_t cols) {
    if (shard.rows() != rows || shard.cols() != cols) throw std::invalid_argument("local store was built without data");
}

std::span<double> prefix(std::vector<double>& buf, std::int64_t length, int rank) {
    if (length > static_cast<std::int64_t>(buf.size()))
        throw ScheduleError("rank " + std::to_string(rank) + " staging array holds " + std::to_string(buf.size()) +
                            " scalars, transfer needs " + std::to_string(length));
    return std::span<double>(buf).first(length);
}

void check_length(std::size_t got, std::int64_t want, int rank, int peer, const Tag& tag) {
    if (static_cast<std::int64_t>(got) != want)
        throw ScheduleError("rank " + std::to_string(rank) + " expected " + std::to_string(want) + " scalars from rank " +
                            std::to_string(peer) + " at " + tag.str() + ", got " + std::to_string(got));
}

} // namespace

DistributedVector DistributedVector::from_global(std::span<const double> x, const ProcessAssignment& assignment) {
    const std::int64_t n = assignment.tree().config().num_points();
    if (static_cast<std::int64_t>(x.size()) != n)
        throw std::invalid_argument("vector length " + std::to_string(x.size()) + " does not match " + std::to_string(n));
    DistributedVector v;
    v.slices.resize(assignment.num_ranks());
    for (int p = 0; p < assignment.num_ranks(); ++p) {
        const auto& r = assignment.owned_range(p);
        v.slices[p].assign(x.begin() + r.begin, x.begin() + r.end);
    }
    return v;
}

DistributedVector DistributedVector::zeros(const ProcessAssignment& assignment) {
    DistributedVector v;
    v.slices.resize(assignment.num_ranks());
    for (int p = 0; p < assignment.num_ranks(); ++p) v.slices[p].assign(assignment.owned_range(p).size(), 0.0);
    return v;
}

DomainVector DistributedVector::gather() const {
    DomainVector out;
    for (const auto& s : slices) out.insert(out.end(), s.begin(), s.end());
    return out;
}

std::span<double> RankState::slot(const Slot& s) {
    std::vector<double>* buf = nullptr;
    switch (s.buffer) {
    case Buffer::Reduce: buf = &reduce; break;
    case Buffer::SourceDirect: buf = &source_direct; break;
    case Buffer::Broadcast: buf = &broadcast; break;
    case Buffer::TargetDirect: buf = &target_direct; break;
    }
    if (s.offset < 0 || s.offset + s.length > static_cast<std::int64_t>(buf->size()))
        throw ScheduleError("payload slot outside its buffer");
    return std::span<double>(*buf).subspan(s.offset, s.length);
}

std::span<const double> RankState::slot(const Slot& s) const { return const_cast<RankState*>(this)->slot(s); }

std::vector<RankState> make_states(const DistributedHMatrix& k) {
    std::vector<RankState> states(k.num_ranks());
    for (int p = 0; p < k.num_ranks(); ++p) {
        const auto& st = k.stores[p];
        states[p].reduce.assign(st.reduce_length, 0.0);
        states[p].source_direct.assign(st.source_direct_length, 0.0);
        states[p].broadcast.assign(st.broadcast_length, 0.0);
        states[p].target_direct.assign(st.target_direct_length, 0.0);
    }
    return states;
}

std::int64_t MatvecStats::total_flops() const {
    std::int64_t total = 0;
    for (auto f : source_flops) total += f;
    for (auto f : target_flops) total += f;
    return total;
}

std::vector<double> MatvecStats::flops_per_rank() const {
    std::vector<double> out(source_flops.size());
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = static_cast<double>(source_flops[p] + target_flops[p]);
    return out;
}

void step1_source_local(const DistributedHMatrix& k, const DistributedVector& x, std::vector<RankState>& states,
                        SimNet& net, MatvecStats* stats) {
    check_slices(x, k, "x");
    net.local([&](RankContext& ctx) {
        const int p = ctx.rank();
        const auto& store = k.stores[p];
        auto& state = states[p];
        const std::span<const double> xp = x.slices[p];
        std::int64_t flops = 0;
        for (const auto& task : store.source_tasks) {
            auto xs = xp.subspan(task.x_offset, task.x_length);
            auto out = state.slot(task.out);
            switch (task.layout) {
            case Layout::LowRankRows:
            case Layout::DenseTransposeRows:
                require_shard(task.shard, task.shard_rows, task.shard_cols);
                gemv_transposed(task.shard, xs, out);
                break;
            case Layout::DenseOnSource:
                require_shard(task.shard, task.shard_rows, task.shard_cols);
                gemv(task.shard, xs, out);
                break;
            case Layout::DenseRows:
                if (xs.size() != out.size()) throw std::invalid_argument("dense pass-through length mismatch");
                std::copy(xs.begin(), xs.end(), out.begin());
                break;
            }
            flops += task.flops;
        }
        if (stats) stats->source_flops[p] += flops;
    });
}

void step2_tree_reduce(const DistributedHMatrix& k, std::vector<RankState>& states, SimNet& net, MatvecStats* stats) {
    const auto& stages = k.plan->reduce_stages();
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const Tag tag{2, stages[i].level, stages[i].stage};
        net.exchange(
            [&](RankContext& ctx) {
                for (const auto& op : k.stores[ctx.rank()].reduce_ops.at(i)) {
                    if (!op.send) continue;
                    auto data = prefix(states[ctx.rank()].reduce, op.length, ctx.rank());
                    ctx.send(op.peer, tag, std::vector<double>(data.begin(), data.end()));
                }
            },
            [&](RankContext& ctx) {
                const int p = ctx.rank();
                for (const auto& op : k.stores[p].reduce_ops.at(i)) {
                    if (op.send) continue;
                    const auto in = ctx.recv(op.peer, tag);
                    check_length(in.size(), op.length, p, op.peer, tag);
                    auto acc = prefix(states[p].reduce, op.length, p);
                    for (std::size_t j = 0; j < in.size(); ++j) acc[j] += in[j];
                    if (stats) stats->reduction_flops[p] += op.length;
                }
            });
    }
}

void step3_leader_transfer(const DistributedHMatrix& k, std::vector<RankState>& states, SimNet& net) {
    const Tag tag{3, 0, 0};
    net.exchange(
        [&](RankContext& ctx) {
            const int p = ctx.rank();
            auto& state = states[p];
            for (const auto& c : k.stores[p].local_copies) {
                const auto from = state.slot(c.from);
                auto to = state.slot(c.to);
                std::copy(from.begin(), from.end(), to.begin());
            }
            for (const auto& op : k.stores[p].peer_sends) {
                if (op.slots.size() != op.placements.size())
                    throw ScheduleError("peer message slot count does not match its block list");
                std::vector<double> packed;
                packed.reserve(op.length);
                for (const auto& s : op.slots) {
                    const auto data = state.slot(s);
                    packed.insert(packed.end(), data.begin(), data.end());
                }
                if (static_cast<std::int64_t>(packed.size()) != op.length)
                    throw ScheduleError("packed payload length does not match the schedule");
                ctx.send(op.peer, tag, std::move(packed));
            }
        },
        [&](RankContext& ctx) {
            const int p = ctx.rank();
            auto& state = states[p];
            for (const auto& op : k.stores[p].peer_receives) {
                const auto in = ctx.recv(op.peer, tag);
                check_length(in.size(), op.length, p, op.peer, tag);
                if (op.slots.size() != op.placements.size())
                    throw ScheduleError("peer message slot count does not match its block list");
                std::size_t pos = 0;
                for (const auto& s : op.slots) {
                    auto to = state.slot(s);
                    if (pos + to.size() > in.size()) throw ScheduleError("peer message shorter than its block list");
                    std::copy(in.begin() + pos, in.begin() + pos + to.size(), to.begin());
                    pos += to.size();
                }
                if (pos != in.size()) throw ScheduleError("peer message longer than its block list");
            }
        });
}

void step4_tree_broadcast(const DistributedHMatrix& k, std::vector<RankState>& states, SimNet& net) {
    const auto& stages = k.plan->broadcast_stages();
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const Tag tag{4, stages[i].level, stages[i].stage};
        net.exchange(
            [&](RankContext& ctx) {
                for (const auto& op : k.stores[ctx.rank()].broadcast_ops.at(i)) {
                    if (!op.send) continue;
                    auto data = prefix(states[ctx.rank()].broadcast, op.length, ctx.rank());
                    ctx.send(op.peer, tag, std::vector<double>(data.begin(), data.end()));
                }
            },
            [&](RankContext& ctx) {
                const int p = ctx.rank();
                for (const auto& op : k.stores[p].broadcast_ops.at(i)) {
                    if (op.send) continue;
                    const auto in = ctx.recv(op.peer, tag);
                    check_length(in.size(), op.length, p, op.peer, tag);
                    auto dst = prefix(states[p].broadcast, op.length, p);
                    std::copy(in.begin(), in.end(), dst.begin());
                }
            });
    }
}

void step5_target_local(const DistributedHMatrix& k, const std::vector<RankState>& states, DistributedVector& y,
                        double alpha, SimNet& net, MatvecStats* stats) {
    check_slices(y, k, "y");
    net.local([&](RankContext& ctx) {
        const int p = ctx.rank();
        const auto& store = k.stores[p];
        const auto& state = states[p];
        std::span<double> yp = y.slices[p];
        std::int64_t flops = 0;
        for (const auto& task : store.target_tasks) {
            auto ys = yp.subspan(task.y_offset, task.y_length);
            const auto z = state.slot(task.in);
            switch (task.layout) {
            case Layout::LowRankRows:
            case Layout::DenseRows:
                require_shard(task.shard, task.shard_rows, task.shard_cols);
                gemv_accumulate(task.shard, z, alpha, ys);
                break;
            case Layout::DenseOnSource:
            case Layout::DenseTransposeRows: axpy(alpha, z, ys); break;
            }
            flops += task.flops;
        }
        if (stats) stats->target_flops[p] += flops;
    });
}

DistributedVector distributed_matvec(const DistributedHMatrix& k, const DistributedVector& x,
                                     const MatvecOptions& options, const DistributedVector* y_in,
                                     MatvecStats* stats) {
    const int P = k.num_ranks();
    if (P < 1 || !k.plan) throw std::invalid_argument("distributed matrix has no ranks");
    DistributedVector y = DistributedVector::zeros(k.assignment());
    if (options.beta != 0.0) {
        if (!y_in) throw std::invalid_argument("beta != 0 needs an input y");
        check_slices(*y_in, k, "y_in");
        for (int p = 0; p < P; ++p)
            for (std::size_t i = 0; i < y.slices[p].size(); ++i) y.slices[p][i] = options.beta * y_in->slices[p][i];
    }
    if (stats) {
        stats->source_flops.assign(P, 0);
        stats->target_flops.assign(P, 0);
        stats->reduction_flops.assign(P, 0);
    }
    SimNet net(P, options.net);
    auto states = make_states(k);
    step1_source_local(k, x, states, net, stats);
    step2_tree_reduce(k, states, net, stats);
    step3_leader_transfer(k, states, net);
    step4_tree_broadcast(k, states, net);
    step5_target_local(k, states, y, options.alpha, net, stats);
    if (stats) stats->ledger = net.ledger();
    return y;
}

} // namespace hdist
