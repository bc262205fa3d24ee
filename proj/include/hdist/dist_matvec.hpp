#pragma once
//
// Five-step distributed H-matrix-vector product over SimNet:
//   1. source-side local products into the staging arrays
//   2. tree reduction of the staging arrays to the source-group leaders
//   3. one message per (source leader, target leader) pair
//   4. tree broadcast from the target-group leaders
//   5. target-side local products into y
//
// Ledger steps are the step numbers above; only 2, 3 and 4 communicate.
//

#include "hdist/distribution.hpp"
#include "hdist/simnet.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace hdist {

/// Raised when the two ends of a transfer disagree on its size.
class ScheduleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Block-row distributed vector: slice p holds the entries of the owned range of rank p.
struct DistributedVector {
    std::vector<std::vector<double>> slices;

    static DistributedVector from_global(std::span<const double> x, const ProcessAssignment& assignment);
    static DistributedVector zeros(const ProcessAssignment& assignment);
    int num_ranks() const { return static_cast<int>(slices.size()); }
    DomainVector gather() const;
};

/// Working buffers of one rank during a product.
struct RankState {
    std::vector<double> reduce;
    std::vector<double> source_direct;
    std::vector<double> broadcast;
    std::vector<double> target_direct;

    std::span<double> slot(const Slot& s);
    std::span<const double> slot(const Slot& s) const;
};

std::vector<RankState> make_states(const DistributedHMatrix& k);

struct MatvecStats {
    CostLedger ledger;
    std::vector<std::int64_t> source_flops;    ///< step 1, per rank
    std::vector<std::int64_t> target_flops;    ///< step 5, per rank
    std::vector<std::int64_t> reduction_flops; ///< additions in step 2, per rank

    std::int64_t total_flops() const; ///< steps 1 and 5 only
    std::vector<double> flops_per_rank() const;
};

struct MatvecOptions {
    double alpha = 1.0; ///< y = alpha K x + beta y
    double beta = 0.0;
    NetOptions net;
};

void step1_source_local(const DistributedHMatrix& k, const DistributedVector& x, std::vector<RankState>& states,
                        SimNet& net, MatvecStats* stats = nullptr);
void step2_tree_reduce(const DistributedHMatrix& k, std::vector<RankState>& states, SimNet& net,
                       MatvecStats* stats = nullptr);
void step3_leader_transfer(const DistributedHMatrix& k, std::vector<RankState>& states, SimNet& net);
void step4_tree_broadcast(const DistributedHMatrix& k, std::vector<RankState>& states, SimNet& net);
/// y must hold the input scaled by beta (or zeros); accumulates alpha K x.
void step5_target_local(const DistributedHMatrix& k, const std::vector<RankState>& states, DistributedVector& y,
                        double alpha, SimNet& net, MatvecStats* stats = nullptr);

/// y = alpha K x + beta y_in.  y_in may be null when beta == 0.
DistributedVector distributed_matvec(const DistributedHMatrix& k, const DistributedVector& x,
                                     const MatvecOptions& options = {}, const DistributedVector* y_in = nullptr,
                                     MatvecStats* stats = nullptr);

} // namespace hdist
