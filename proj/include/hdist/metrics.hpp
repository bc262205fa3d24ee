#pragma once
//
// Post-processing of matvec runs: simulated cost, speedup tables, balance and
// least-squares fits of cost models.
//

#include "hdist/dist_matvec.hpp"

#include <string>
#include <vector>

namespace hdist {

struct CostModel {
    double alpha = 1.0; ///< per message
    double beta = 0.01; ///< per scalar
    double rate = 1.0;  ///< flops per unit time
};

/// Max over ranks of alpha * messages + beta * scalars + flops / rate.
double simulated_cost(const CostLedger& ledger, const std::vector<std::int64_t>& flops_per_rank,
                      const CostModel& model);

struct RunRecord {
    int d = 1;
    int n = 0;
    int leaf_size = 0;
    std::int64_t N = 0;
    AdmissibilityKind adm = AdmissibilityKind::Weak;
    double rho = 0.0;
    int r = 0;
    int P = 1;
    std::uint64_t seed = 0;
    int trials = 0;

    std::vector<std::int64_t> flops; ///< steps 1 and 5, per rank
    CostLedger ledger;               ///< one product; every trial produces the same ledger
    double storage_balance = 1.0;
    double flop_balance = 1.0;
    double sim_cost = 0.0; ///< mean over trials
    double wall_seconds = 0.0; ///< informational only, never written to reports

    std::int64_t max_messages(int step) const;
    std::int64_t max_scalars(int step) const;
    /// Max per-rank messages summed over steps 2 to 4.
    std::int64_t max_comm_messages() const;
};

/// Distributes `config` on P ranks and runs `trials` products with fresh
/// random vectors.  Throws if the flop totals disagree with flop_count.
RunRecord measure_run(const HMatrixConfig& config, int P, int trials, const CostModel& model,
                      const NetOptions& net = {});
RunRecord measure_run(const HMatrixConfig& config, const DistributedHMatrix& k, int trials, const CostModel& model,
                      const NetOptions& net = {});

struct SpeedupRow {
    int P = 1;
    double cost = 0.0;
    double speedup = 0.0;
    double eff = 0.0;
};

/// Speedup = P0 t0 / t1 and Eff = 100 P0 t0 / (P1 t1) against the row with P == baseline_P.
std::vector<SpeedupRow> speedup_efficiency(const std::vector<std::pair<int, double>>& p_cost, int baseline_P);

struct FitResult {
    std::vector<std::string> terms;
    std::vector<double> coefficients;
    std::vector<double> relative_residuals; ///< (model - observed) / observed per point
    double max_relative_residual = 0.0;

    /// Share of term `t` in the fitted value of a design row.
    double term_share(const std::vector<double>& row, int t) const;
    double predict(const std::vector<double>& row) const;
};

/// Nonnegative least squares on relative error: minimizes
/// sum_i ((A_i c - y_i) / y_i)^2 subject to c >= 0.  Throws std::invalid_argument
/// when the weighted design does not have full column rank.
FitResult fit_nonnegative(const std::vector<std::vector<double>>& design, const std::vector<double>& observed,
                          std::vector<std::string> terms);

struct ComplexityPoint {
    std::int64_t N = 0;
    int P = 1;
    double cost = 0.0;
};

/// Model terms a N log N / P + b log P + c log^2 P, plus log(N/P) and
/// (N/P)^((d-1)/d) for standard admissibility.  Logs are base 2.
std::vector<double> complexity_terms(std::int64_t N, int P, int d, AdmissibilityKind kind);
std::vector<std::string> complexity_term_names(AdmissibilityKind kind);

/// Needs at least three distinct P and two distinct N.
FitResult fit_complexity(const std::vector<ComplexityPoint>& points, int d, AdmissibilityKind kind);

} // namespace hdist
