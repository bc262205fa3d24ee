#pragma once
//
// Deterministic in-process message passing over P logical ranks.
//
// Execution proceeds in exchanges: every rank runs a send phase, the network
// delivers all messages, then every rank runs a receive phase.  Ranks may be
// multiplexed over any number of worker threads; a rank only touches its own
// context, and messages are merged in rank order, so outputs and ledgers do
// not depend on the worker count.
//

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

namespace hdist {

struct Tag {
    int step = 0;
    int level = 0;
    int stage = 0;

    friend auto operator<=>(const Tag&, const Tag&) = default;
    std::string str() const;
};

struct Message {
    int src = 0;
    int dst = 0;
    Tag tag;
    std::vector<double> payload;
};

class DeadlockError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class MessageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RankCounters {
    std::int64_t messages_sent = 0;
    std::int64_t messages_received = 0;
    std::int64_t scalars_sent = 0;
    std::int64_t scalars_received = 0;

    std::int64_t messages() const { return messages_sent + messages_received; }
    std::int64_t scalars() const { return scalars_sent + scalars_received; }
    RankCounters& operator+=(const RankCounters& o);
    friend bool operator==(const RankCounters&, const RankCounters&) = default;
};

class CostLedger {
  public:
    explicit CostLedger(int num_ranks = 0) : per_rank_(num_ranks) {}

    int num_ranks() const { return static_cast<int>(per_rank_.size()); }
    void record_send(int rank, int step, std::int64_t scalars);
    void record_receive(int rank, int step, std::int64_t scalars);

    /// Counters of one rank for one step (zero if the rank never took part).
    RankCounters at(int rank, int step) const;
    RankCounters total(int rank) const;
    /// Sum over all ranks for one step, or over all steps when step < 0.
    RankCounters global(int step = -1) const;
    std::vector<int> steps() const;

    std::string to_csv() const;
    nlohmann::json to_json() const;

    friend bool operator==(const CostLedger&, const CostLedger&) = default;

  private:
    std::vector<std::map<int, RankCounters>> per_rank_;
};

/// alpha * messages + beta * scalars per rank (sent plus received), over one
/// step or all steps when step < 0.
std::vector<double> cost(const CostLedger& ledger, double alpha, double beta, int step = -1);

class RankContext {
  public:
    int rank() const { return rank_; }
    int num_ranks() const { return num_ranks_; }

    /// Queued until the end of the current send phase.
    void send(int dst, Tag tag, std::vector<double> payload);
    /// Takes a message delivered in the current exchange; throws DeadlockError
    /// if it never arrived.
    std::vector<double> recv(int src, Tag tag);
    bool has_message(int src, Tag tag) const;

  private:
    friend class SimNet;
    int rank_ = 0;
    int num_ranks_ = 0;
    std::vector<Message> outbox_;
    std::map<std::pair<int, Tag>, std::vector<double>> inbox_;
    CostLedger* ledger_ = nullptr;
};

struct NetOptions {
    int workers = 1;
};

using RankFn = std::function<void(RankContext&)>;

struct Exchange {
    RankFn send_phase;
    RankFn recv_phase;
};

class SimNet {
  public:
    explicit SimNet(int num_ranks, NetOptions options = {});
    SimNet(const SimNet&) = delete;
    SimNet& operator=(const SimNet&) = delete;

    int num_ranks() const { return static_cast<int>(contexts_.size()); }
    const NetOptions& options() const { return options_; }

    /// One superstep.  Either phase may be empty.  Throws DeadlockError when a
    /// receive finds no message or a delivered message is left unconsumed, and
    /// MessageError on malformed or duplicate sends.
    void exchange(const RankFn& send_phase, const RankFn& recv_phase);
    /// Runs `body` once per rank with no communication.
    void local(const RankFn& body);

    const CostLedger& ledger() const { return ledger_; }
    void reset_ledger() { ledger_ = CostLedger(num_ranks()); }

  private:
    void for_each_rank(const RankFn& body);

    NetOptions options_;
    std::vector<RankContext> contexts_;
    CostLedger ledger_;
};

/// Runs a fixed program of exchanges on a fresh network and returns its ledger.
CostLedger run(int num_ranks, const std::vector<Exchange>& program, NetOptions options = {});

} // namespace hdist
