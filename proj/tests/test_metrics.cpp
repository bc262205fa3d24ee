#include "hdist/metrics.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

#include <cmath>

using namespace hdist;
using namespace hdist::testing;

TEST(Metrics, SimulatedCostTakesSlowestRank) {
    CostLedger ledger(2);
    ledger.record_send(0, 3, 10);
    ledger.record_receive(1, 3, 10);
    ledger.record_send(0, 2, 5);
    ledger.record_receive(1, 2, 5);
    const CostModel model{1.0, 0.1, 2.0};
    // Rank 0: 2 messages, 15 scalars, 4 flops.  Rank 1: same traffic, 40 flops.
    EXPECT_NEAR(simulated_cost(ledger, {4, 40}, model), 2.0 + 1.5 + 20.0, 1e-12);
    EXPECT_NEAR(simulated_cost(ledger, {40, 4}, model), 2.0 + 1.5 + 20.0, 1e-12);
    EXPECT_THROW(simulated_cost(ledger, {1}, model), std::invalid_argument);
}

TEST(Metrics, SpeedupAndEfficiency) {
    const auto rows = speedup_efficiency({{1, 8.0}, {2, 8.0}, {4, 2.0}, {8, 2.0}}, 1);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_DOUBLE_EQ(rows[0].speedup, 1.0);
    EXPECT_DOUBLE_EQ(rows[0].eff, 100.0);
    EXPECT_DOUBLE_EQ(rows[2].speedup, 4.0);
    EXPECT_DOUBLE_EQ(rows[2].eff, 100.0);
    for (const auto& row : rows) EXPECT_DOUBLE_EQ(row.eff, row.speedup / row.P * 100.0);
    EXPECT_DOUBLE_EQ(rows[3].eff, 50.0);

    const auto from2 = speedup_efficiency({{2, 6.0}, {4, 4.0}}, 2);
    EXPECT_DOUBLE_EQ(from2[0].eff, 100.0);
    EXPECT_DOUBLE_EQ(from2[1].speedup, 3.0);
    EXPECT_DOUBLE_EQ(from2[1].eff, 75.0);
    EXPECT_THROW(speedup_efficiency({{2, 1.0}}, 1), std::invalid_argument);
}

TEST(Metrics, SyntheticFitIsExact) {
    for (auto kind : {AdmissibilityKind::Weak, AdmissibilityKind::Standard}) {
        const std::vector<double> truth = kind == AdmissibilityKind::Weak ? std::vector<double>{0.5, 3.0, 1.25}
                                                                          : std::vector<double>{0.5, 3.0, 1.25, 2.0, 0.75};
        std::vector<ComplexityPoint> pts;
        for (std::int64_t N : {256, 1024, 4096})
            for (int P : {2, 4, 8, 16}) {
                const auto row = complexity_terms(N, P, 2, kind);
                double y = 0;
                for (std::size_t t = 0; t < row.size(); ++t) y += truth[t] * row[t];
                pts.push_back({N, P, y});
            }
        const auto fit = fit_complexity(pts, 2, kind);
        EXPECT_EQ(fit.terms, complexity_term_names(kind));
        EXPECT_LE(fit.max_relative_residual, 1e-9);
        for (std::size_t t = 0; t < truth.size(); ++t) EXPECT_NEAR(fit.coefficients[t], truth[t], 1e-6);
    }
}

TEST(Metrics, FitIsNonnegative) {
    // y = 2 x1 - x2 has no nonnegative exact fit.
    std::vector<std::vector<double>> design;
    std::vector<double> y;
    for (int i = 1; i <= 6; ++i) {
        design.push_back({static_cast<double>(i), 1.0});
        y.push_back(2.0 * i - 1.0 + 4.0);
    }
    const auto fit = fit_nonnegative(design, y, {"x", "one"});
    for (double c : fit.coefficients) EXPECT_GE(c, 0.0);
    EXPECT_NEAR(fit.predict({3.0, 1.0}), 2.0 * 3 + 3.0, 1e-9);
    EXPECT_NEAR(fit.term_share({3.0, 1.0}, 0), 6.0 / 9.0, 1e-9);
}

TEST(Metrics, FitRejectsDegenerateInput) {
    std::vector<std::vector<double>> design{{1, 2}, {2, 4}, {3, 6}};
    EXPECT_THROW(fit_nonnegative(design, {1, 2, 3}, {"a", "b"}), std::invalid_argument);
    EXPECT_THROW(fit_nonnegative(design, {1, 2}, {"a", "b"}), std::invalid_argument);
    std::vector<ComplexityPoint> two_p{{256, 2, 1}, {256, 4, 1}, {1024, 2, 1}, {1024, 4, 1}};
    EXPECT_THROW(fit_complexity(two_p, 1, AdmissibilityKind::Weak), std::invalid_argument);
    std::vector<ComplexityPoint> one_n{{256, 2, 1}, {256, 4, 1}, {256, 8, 1}};
    EXPECT_THROW(fit_complexity(one_n, 1, AdmissibilityKind::Weak), std::invalid_argument);
}

TEST(Metrics, MeasureRunConservesFlops) {
    const auto cfg = make_config(2, 16, 2, AdmissibilityRule::standard_default(2));
    const auto rec = measure_run(cfg, 8, 3, CostModel{});
    std::int64_t total = 0;
    for (auto f : rec.flops) total += f;
    EXPECT_EQ(total, flop_count(*build_structure(cfg)));
    EXPECT_EQ(rec.N, 256);
    EXPECT_EQ(rec.P, 8);
    EXPECT_GT(rec.sim_cost, 0.0);
    EXPECT_GE(rec.storage_balance, 1.0);
    EXPECT_GE(rec.flop_balance, 1.0);
    EXPECT_GE(rec.max_comm_messages(), rec.max_messages(3));
}

TEST(Metrics, WeakSweepFitsComplexityModel) {
    std::vector<ComplexityPoint> pts;
    for (int n = 64; n <= 4096; n *= 2)
        for (int P = 2; P <= 64 && P <= n / 4; P *= 2) {
            const auto rec = measure_run(make_config(1, n, 4, AdmissibilityRule::weak()), P, 1, CostModel{});
            pts.push_back({rec.N, P, rec.sim_cost});
        }
    ASSERT_GE(pts.size(), 30u);
    const auto fit = fit_complexity(pts, 1, AdmissibilityKind::Weak);
    EXPECT_LE(fit.max_relative_residual, 0.25);
    for (const auto& p : pts) {
        if (p.P != 2) continue;
        const auto row = complexity_terms(p.N, p.P, 1, AdmissibilityKind::Weak);
        EXPECT_GE(fit.term_share(row, 0), 0.90) << "N=" << p.N;
    }
}
