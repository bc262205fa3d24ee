#include "hdist/simnet.hpp"

#include <exception>
#include <set>
#include <sstream>
#include <thread>

namespace hdist {

std::string Tag::str() const {
    return "(step " + std::to_string(step) + ", level " + std::to_string(level) + ", stage " + std::to_string(stage) +
           ")";
}

RankCounters& RankCounters::operator+=(const RankCounters& o) {
    messages_sent += o.messages_sent;
    messages_received += o.messages_received;
    scalars_sent += o.scalars_sent;
    scalars_received += o.scalars_received;
    return *this;
}

void CostLedger::record_send(int rank, int step, std::int64_t scalars) {
    auto& c = per_rank_.at(rank)[step];
    ++c.messages_sent;
    c.scalars_sent += scalars;
}

void CostLedger::record_receive(int rank, int step, std::int64_t scalars) {
    auto& c = per_rank_.at(rank)[step];
    ++c.messages_received;
    c.scalars_received += scalars;
}

RankCounters CostLedger::at(int rank, int step) const {
    const auto& m = per_rank_.at(rank);
    auto it = m.find(step);
    return it == m.end() ? RankCounters{} : it->second;
}

RankCounters CostLedger::total(int rank) const {
    RankCounters t;
    for (const auto& [step, c] : per_rank_.at(rank)) t += c;
    return t;
}

RankCounters CostLedger::global(int step) const {
    RankCounters t;
    for (int r = 0; r < num_ranks(); ++r) t += step < 0 ? total(r) : at(r, step);
    return t;
}

std::vector<int> CostLedger::steps() const {
    std::set<int> s;
    for (const auto& m : per_rank_)
        for (const auto& [step, c] : m) s.insert(step);
    return {s.begin(), s.end()};
}

std::string CostLedger::to_csv() const {
    std::ostringstream os;
    os << "rank,step,messages_sent,messages_received,scalars_sent,scalars_received\n";
    const auto all = steps();
    for (int r = 0; r < num_ranks(); ++r)
        for (int step : all) {
            const auto c = at(r, step);
            os << r << ',' << step << ',' << c.messages_sent << ',' << c.messages_received << ',' << c.scalars_sent
               << ',' << c.scalars_received << '\n';
        }
    return os.str();
}

nlohmann::json CostLedger::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    const auto all = steps();
    for (int r = 0; r < num_ranks(); ++r)
        for (int step : all) {
            const auto c = at(r, step);
            rows.push_back({{"rank", r},
                            {"step", step},
                            {"messages_sent", c.messages_sent},
                            {"messages_received", c.messages_received},
                            {"scalars_sent", c.scalars_sent},
                            {"scalars_received", c.scalars_received}});
        }
    return rows;
}

std::vector<double> cost(const CostLedger& ledger, double alpha, double beta, int step) {
    std::vector<double> out(ledger.num_ranks());
    for (int r = 0; r < ledger.num_ranks(); ++r) {
        const auto c = step < 0 ? ledger.total(r) : ledger.at(r, step);
        out[r] = alpha * static_cast<double>(c.messages()) + beta * static_cast<double>(c.scalars());
    }
    return out;
}

void RankContext::send(int dst, Tag tag, std::vector<double> payload) {
    outbox_.push_back(Message{rank_, dst, tag, std::move(payload)});
}

std::vector<double> RankContext::recv(int src, Tag tag) {
    auto it = inbox_.find({src, tag});
    if (it == inbox_.end())
        throw DeadlockError("rank " + std::to_string(rank_) + " is waiting for a message from rank " +
                            std::to_string(src) + " with tag " + tag.str() + " that was never sent");
    std::vector<double> payload = std::move(it->second);
    inbox_.erase(it);
    ledger_->record_receive(rank_, tag.step, static_cast<std::int64_t>(payload.size()));
    return payload;
}

bool RankContext::has_message(int src, Tag tag) const { return inbox_.contains({src, tag}); }

SimNet::SimNet(int num_ranks, NetOptions options) : options_(options), contexts_(num_ranks), ledger_(num_ranks) {
    if (num_ranks < 1) throw std::invalid_argument("SimNet needs at least one rank");
    if (options_.workers < 1) options_.workers = 1;
    for (int r = 0; r < num_ranks; ++r) {
        contexts_[r].rank_ = r;
        contexts_[r].num_ranks_ = num_ranks;
        contexts_[r].ledger_ = &ledger_;
    }
}

void SimNet::for_each_rank(const RankFn& body) {
    const int n = num_ranks();
    const int workers = std::min(options_.workers, n);
    if (workers <= 1) {
        for (auto& ctx : contexts_) body(ctx);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (int r = w; r < n; r += workers) {
                try {
                    body(contexts_[r]);
                } catch (...) {
                    errors[r] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    // Lowest failing rank wins, as in the serial path.
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void SimNet::exchange(const RankFn& send_phase, const RankFn& recv_phase) {
    for (auto& ctx : contexts_) ctx.outbox_.clear();
    if (send_phase) for_each_rank(send_phase);

    for (auto& ctx : contexts_) {
        for (auto& m : ctx.outbox_) {
            if (m.dst < 0 || m.dst >= num_ranks())
                throw MessageError("rank " + std::to_string(m.src) + " sent to invalid rank " + std::to_string(m.dst));
            if (m.dst == m.src) throw MessageError("rank " + std::to_string(m.src) + " sent a message to itself");
            if (m.payload.empty())
                throw MessageError("rank " + std::to_string(m.src) + " sent an empty payload with tag " + m.tag.str());
            auto& inbox = contexts_[m.dst].inbox_;
            const auto key = std::make_pair(m.src, m.tag);
            if (inbox.contains(key))
                throw MessageError("duplicate message " + std::to_string(m.src) + " -> " + std::to_string(m.dst) +
                                   " with tag " + m.tag.str());
            ledger_.record_send(m.src, m.tag.step, static_cast<std::int64_t>(m.payload.size()));
            inbox.emplace(key, std::move(m.payload));
        }
        ctx.outbox_.clear();
    }

    if (recv_phase) for_each_rank(recv_phase);

    std::string pending;
    for (auto& ctx : contexts_) {
        for (const auto& [key, payload] : ctx.inbox_)
            pending += " " + std::to_string(key.first) + "->" + std::to_string(ctx.rank_) + " " + key.second.str();
        ctx.inbox_.clear();
    }
    if (!pending.empty()) throw DeadlockError("unmatched messages at end of exchange:" + pending);
}

void SimNet::local(const RankFn& body) { for_each_rank(body); }

CostLedger run(int num_ranks, const std::vector<Exchange>& program, NetOptions options) {
    SimNet net(num_ranks, options);
    for (const auto& ex : program) net.exchange(ex.send_phase, ex.recv_phase);
    return net.ledger();
}

} // namespace hdist
