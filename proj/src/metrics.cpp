#include "hdist/metrics.hpp"

#include "hdist/keyed_random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

namespace hdist {

double simulated_cost(const CostLedger& ledger, const std::vector<std::int64_t>& flops_per_rank,
                      const CostModel& model) {
    if (static_cast<int>(flops_per_rank.size()) != ledger.num_ranks())
        throw std::invalid_argument("flop vector and ledger disagree on the rank count");
    if (!(model.rate > 0.0)) throw std::invalid_argument("flop rate must be positive");
    const auto comm = cost(ledger, model.alpha, model.beta);
    double worst = 0.0;
    for (int p = 0; p < ledger.num_ranks(); ++p)
        worst = std::max(worst, comm[p] + static_cast<double>(flops_per_rank[p]) / model.rate);
    return worst;
}

std::int64_t RunRecord::max_messages(int step) const {
    std::int64_t m = 0;
    for (int p = 0; p < ledger.num_ranks(); ++p) m = std::max(m, ledger.at(p, step).messages());
    return m;
}

std::int64_t RunRecord::max_scalars(int step) const {
    std::int64_t m = 0;
    for (int p = 0; p < ledger.num_ranks(); ++p) m = std::max(m, ledger.at(p, step).scalars());
    return m;
}

std::int64_t RunRecord::max_comm_messages() const {
    std::int64_t m = 0;
    for (int p = 0; p < ledger.num_ranks(); ++p) {
        std::int64_t total = 0;
        for (int step = 2; step <= 4; ++step) total += ledger.at(p, step).messages();
        m = std::max(m, total);
    }
    return m;
}

RunRecord measure_run(const HMatrixConfig& config, int P, int trials, const CostModel& model, const NetOptions& net) {
    return measure_run(config, distribute(config, P), trials, model, net);
}

RunRecord measure_run(const HMatrixConfig& config, const DistributedHMatrix& k, int trials, const CostModel& model,
                      const NetOptions& net) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    RunRecord rec;
    rec.d = config.domain.d;
    rec.n = config.domain.n;
    rec.leaf_size = config.domain.leaf_size;
    rec.N = config.domain.num_points();
    rec.adm = config.rule.kind;
    rec.rho = config.rule.rho;
    rec.r = config.r;
    rec.P = k.num_ranks();
    rec.seed = config.seed;
    rec.trials = trials;

    const std::int64_t expected = flop_count(k.plan->structure());
    MatvecOptions opts;
    opts.net = net;
    const auto start = std::chrono::steady_clock::now();
    double cost_sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto x = random_vector(rec.N, combine64(config.seed, static_cast<std::uint64_t>(t) + 1));
        MatvecStats stats;
        distributed_matvec(k, DistributedVector::from_global(x, k.assignment()), opts, nullptr, &stats);
        if (stats.total_flops() != expected)
            throw std::logic_error("distributed flop total " + std::to_string(stats.total_flops()) +
                                   " differs from sequential count " + std::to_string(expected));
        std::vector<std::int64_t> flops(rec.P);
        for (int p = 0; p < rec.P; ++p) flops[p] = stats.source_flops[p] + stats.target_flops[p];
        if (t == 0) {
            rec.flops = flops;
            rec.ledger = stats.ledger;
        } else if (!(stats.ledger == rec.ledger) || flops != rec.flops) {
            throw std::logic_error("communication pattern changed between trials");
        }
        cost_sum += simulated_cost(stats.ledger, flops, model);
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.sim_cost = cost_sum / trials;
    rec.storage_balance = measure_balance(k.stores).factor;
    std::vector<double> f(rec.flops.begin(), rec.flops.end());
    rec.flop_balance = balance_of(f).factor;
    return rec;
}

std::vector<SpeedupRow> speedup_efficiency(const std::vector<std::pair<int, double>>& p_cost, int baseline_P) {
    auto base = std::find_if(p_cost.begin(), p_cost.end(), [&](const auto& pc) { return pc.first == baseline_P; });
    if (base == p_cost.end()) throw std::invalid_argument("no record for baseline P=" + std::to_string(baseline_P));
    const double p0 = base->first, t0 = base->second;
    std::vector<SpeedupRow> out;
    out.reserve(p_cost.size());
    for (const auto& [P, t1] : p_cost) {
        if (!(t1 > 0.0)) throw std::invalid_argument("costs must be positive");
        SpeedupRow row{P, t1, p0 * t0 / t1, 0.0};
        row.eff = 100.0 * p0 * t0 / (P * t1);
        out.push_back(row);
    }
    return out;
}

double FitResult::predict(const std::vector<double>& row) const {
    if (row.size() != coefficients.size()) throw std::invalid_argument("design row has the wrong number of terms");
    double v = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) v += coefficients[j] * row[j];
    return v;
}

double FitResult::term_share(const std::vector<double>& row, int t) const {
    const double total = predict(row);
    return total > 0.0 ? coefficients.at(t) * row.at(t) / total : 0.0;
}

namespace {

// Lawson-Hanson active set method for min ||A x - b|| subject to x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    const int n = static_cast<int>(A.cols());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(n, false);
    const double tol = 1e-12 * A.lpNorm<Eigen::Infinity>() * std::max<Eigen::Index>(A.rows(), A.cols());

    auto solve_passive = [&](Eigen::VectorXd& z) {
        std::vector<int> idx;
        for (int j = 0; j < n; ++j)
            if (passive[j]) idx.push_back(j);
        z.setZero(n);
        if (idx.empty()) return;
        Eigen::MatrixXd Ap(A.rows(), idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(k) = A.col(idx[k]);
        const Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
        for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zp[k];
    };

    for (int outer = 0; outer < 3 * n + 10; ++outer) {
        const Eigen::VectorXd w = A.transpose() * (b - A * x);
        int best = -1;
        for (int j = 0; j < n; ++j)
            if (!passive[j] && w[j] > tol && (best < 0 || w[j] > w[best])) best = j;
        if (best < 0) break;
        passive[best] = true;
        Eigen::VectorXd z;
        for (int inner = 0; inner < 3 * n + 10; ++inner) {
            solve_passive(z);
            bool feasible = true;
            for (int j = 0; j < n; ++j)
                if (passive[j] && z[j] <= 0.0) feasible = false;
            if (feasible) break;
            double step = 1.0;
            for (int j = 0; j < n; ++j)
                if (passive[j] && z[j] <= 0.0) step = std::min(step, x[j] / (x[j] - z[j]));
            x += step * (z - x);
            for (int j = 0; j < n; ++j)
                if (passive[j] && std::abs(x[j]) <= tol) {
                    passive[j] = false;
                    x[j] = 0.0;
                }
        }
        x = z;
    }
    return x;
}

} // namespace

FitResult fit_nonnegative(const std::vector<std::vector<double>>& design, const std::vector<double>& observed,
                          std::vector<std::string> terms) {
    const int m = static_cast<int>(design.size());
    const int n = static_cast<int>(terms.size());
    if (m == 0 || static_cast<int>(observed.size()) != m) throw std::invalid_argument("design and observations differ in length");
    if (m < n) throw std::invalid_argument("fewer observations than model terms; widen the sweep");
    Eigen::MatrixXd A(m, n);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(design[i].size()) != n) throw std::invalid_argument("design row has the wrong number of terms");
        if (!(observed[i] > 0.0)) throw std::invalid_argument("observations must be positive for a relative fit");
        for (int j = 0; j < n; ++j) A(i, j) = design[i][j] / observed[i];
        b[i] = 1.0;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < n)
        throw std::invalid_argument("rank-deficient design (rank " + std::to_string(qr.rank()) + " of " +
                                    std::to_string(n) + " terms); widen the sweep over N and P");

    const Eigen::VectorXd c = nnls(A, b);
    FitResult fit;
    fit.terms = std::move(terms);
    fit.coefficients.assign(c.data(), c.data() + n);
    for (int i = 0; i < m; ++i) {
        const double rel = (fit.predict(design[i]) - observed[i]) / observed[i];
        fit.relative_residuals.push_back(rel);
        fit.max_relative_residual = std::max(fit.max_relative_residual, std::abs(rel));
    }
    return fit;
}

std::vector<double> complexity_terms(std::int64_t N, int P, int d, AdmissibilityKind kind) {
    const double n = static_cast<double>(N), p = P, lp = std::log2(p);
    std::vector<double> row{n * std::log2(n) / p, lp, lp * lp};
    if (kind == AdmissibilityKind::Standard) {
        row.push_back(std::log2(n / p));
        row.push_back(std::pow(n / p, static_cast<double>(d - 1) / d));
    }
    return row;
}

std::vector<std::string> complexity_term_names(AdmissibilityKind kind) {
    std::vector<std::string> names{"NlogN/P", "logP", "log2P"};
    if (kind == AdmissibilityKind::Standard) {
        names.emplace_back("log(N/P)");
        names.emplace_back("(N/P)^((d-1)/d)");
    }
    return names;
}

FitResult fit_complexity(const std::vector<ComplexityPoint>& points, int d, AdmissibilityKind kind) {
    std::set<int> ps;
    std::set<std::int64_t> ns;
    for (const auto& pt : points) {
        ps.insert(pt.P);
        ns.insert(pt.N);
    }
    if (ps.size() < 3 || ns.size() < 2)
        throw std::invalid_argument("complexity fit needs at least 3 values of P and 2 of N; widen the sweep");
    std::vector<std::vector<double>> design;
    std::vector<double> observed;
    for (const auto& pt : points) {
        design.push_back(complexity_terms(pt.N, pt.P, d, kind));
        observed.push_back(pt.cost);
    }
    return fit_nonnegative(design, observed, complexity_term_names(kind));
}

} // namespace hdist
