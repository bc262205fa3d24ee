#include "hdist/cli.hpp"

#include "hdist/keyed_random.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace hdist {

AdmissibilityRule RunSpec::rule() const {
    if (adm == AdmissibilityKind::Weak) return AdmissibilityRule::weak();
    return rho ? AdmissibilityRule::standard(*rho) : AdmissibilityRule::standard_default(d);
}

HMatrixConfig RunSpec::config(int n_value) const {
    HMatrixConfig c;
    c.domain.d = d;
    c.domain.n = n_value;
    c.domain.leaf_size = leaf_size;
    c.rule = rule();
    c.r = r;
    c.seed = seed;
    c.validate();
    return c;
}

void RunSpec::validate() const {
    if (n.empty()) throw UsageError("--n needs at least one value");
    if (procs.empty()) throw UsageError("--procs needs at least one value");
    if (trials < 1) throw UsageError("--trials must be >= 1");
    if (workers < 1) throw UsageError("--workers must be >= 1");
    if (format != "csv" && format != "json") throw UsageError("--format must be csv or json");
    if (rho && !(*rho > 0.0)) throw UsageError("--rho must be positive");
    if (!(cost.rate > 0.0)) throw UsageError("--rate must be positive");
    for (int p : procs)
        if (p < 1) throw UsageError("process counts must be >= 1");
    try {
        for (int v : n) {
            const auto c = config(v);
            const DomainTree tree(c.domain);
            for (int p : procs)
                if (p > tree.num_leaves())
                    throw UsageError("P=" + std::to_string(p) + " exceeds leaf count " +
                                     std::to_string(tree.num_leaves()) + " for n=" + std::to_string(v));
        }
    } catch (const UsageError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

namespace {

void add_common(CLI::App& sub, RunSpec& spec, std::string& adm, bool& rho_default, double& rho) {
    sub.add_option("--d", spec.d, "spatial dimension (1, 2 or 3)")->check(CLI::Range(1, 3));
    sub.add_option("--n", spec.n, "points per dimension, comma separated")->delimiter(',');
    sub.add_option("--leaf-size", spec.leaf_size, "points per dimension in a leaf box");
    sub.add_option("--adm", adm, "admissibility: weak or standard")->check(CLI::IsMember({"weak", "standard"}));
    sub.add_option("--rho", rho, "standard admissibility parameter (implies --adm standard)");
    sub.add_flag("--rho-default", rho_default, "standard admissibility with rho = sqrt(d)");
    sub.add_option("--rank", spec.r, "rank of low-rank blocks");
    sub.add_option("--procs", spec.procs, "process counts, comma separated")->delimiter(',');
    sub.add_option("--seed", spec.seed, "seed for matrix entries and vectors");
    sub.add_option("--trials", spec.trials, "random vectors per configuration");
    sub.add_option("--alpha", spec.cost.alpha, "cost per message");
    sub.add_option("--beta", spec.cost.beta, "cost per scalar");
    sub.add_option("--rate", spec.cost.rate, "flops per unit of simulated time");
    sub.add_option("--output", spec.output, "output file (default: stdout)");
    sub.add_option("--format", spec.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub.add_option("--workers", spec.workers, "worker threads for simulated ranks (env HDIST_WORKERS)");
}

void write_output(const RunSpec& spec, const std::string& text, std::ostream& out) {
    if (spec.output.empty()) {
        out << text;
        return;
    }
    std::ofstream f(spec.output, std::ios::binary);
    if (!f) throw UsageError("cannot open " + spec.output + " for writing");
    f << text;
    if (!f.flush()) throw UsageError("failed writing " + spec.output);
}

std::string describe(const RunSpec& spec, int n) {
    std::string s = "d=" + std::to_string(spec.d) + " n=" + std::to_string(n) + " leaf=" +
                    std::to_string(spec.leaf_size) + " adm=" + spec.rule().name();
    if (spec.adm == AdmissibilityKind::Standard) s += " rho=" + format_fixed(spec.rule().rho, 6);
    return s + " r=" + std::to_string(spec.r);
}

double relative_error(const DomainVector& a, const DomainVector& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ref[i]) * (a[i] - ref[i]);
        den += ref[i] * ref[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

} // namespace

std::optional<RunSpec> parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
                                  int& exit_code) {
    RunSpec spec;
    if (const char* env = std::getenv("HDIST_WORKERS")) {
        try {
            spec.workers = std::stoi(env);
        } catch (const std::exception&) {
            err << "error: HDIST_WORKERS must be an integer\n";
            exit_code = kExitUsage;
            return std::nullopt;
        }
    }
    std::string adm = "weak";
    bool rho_default = false;
    double rho = 0.0;

    CLI::App app{"Distributed H-matrix-vector product on simulated ranks"};
    app.require_subcommand(1);
    auto* verify = app.add_subcommand("verify", "compare the distributed product with the sequential one");
    auto* sweep = app.add_subcommand("sweep", "cost counters and speedups over n and P");
    auto* inspect = app.add_subcommand("inspect", "block structure and process assignment");
    for (auto* sub : {verify, sweep, inspect}) add_common(*sub, spec, adm, rho_default, rho);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        exit_code = code == 0 ? kExitOk : kExitUsage;
        return std::nullopt;
    }
    spec.command = app.get_subcommands().front()->get_name();
    spec.adm = adm == "standard" ? AdmissibilityKind::Standard : AdmissibilityKind::Weak;
    const auto* sub = app.get_subcommands().front();
    if (sub->count("--rho") > 0) {
        if (rho_default) {
            err << "error: --rho and --rho-default are mutually exclusive\n";
            exit_code = kExitUsage;
            return std::nullopt;
        }
        spec.adm = AdmissibilityKind::Standard;
        spec.rho = rho;
    }
    if (rho_default) spec.adm = AdmissibilityKind::Standard;
    exit_code = kExitOk;
    return spec;
}

int cmd_verify(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    NetOptions net{spec.workers};
    for (int n : spec.n) {
        const auto config = spec.config(n);
        if (config.domain.num_points() > kVerifyCap)
            throw UsageError("verify needs N <= " + std::to_string(kVerifyCap) + ", got N=" +
                             std::to_string(config.domain.num_points()));
        const auto K = build_hmatrix(config);
        std::vector<DomainVector> xs, refs;
        for (int t = 0; t < spec.trials; ++t) {
            xs.push_back(random_vector(K.size(), combine64(spec.seed ^ 0x5eedULL, static_cast<std::uint64_t>(t))));
            refs.push_back(sequential_matvec(K, xs.back()));
        }
        for (int P : spec.procs) {
            auto plan = std::make_shared<const DistributionPlan>(K.structure_ptr(),
                                                                 std::make_shared<const ProcessAssignment>(K.structure().tree(), P));
            const auto dk = distribute(config, plan);
            MatvecOptions opts;
            opts.net = net;
            double worst = 0.0;
            for (int t = 0; t < spec.trials; ++t) {
                const auto y = distributed_matvec(dk, DistributedVector::from_global(xs[t], dk.assignment()), opts);
                worst = std::max(worst, relative_error(y.gather(), refs[t]));
            }
            const bool ok = worst <= kVerifyTolerance;
            out << describe(spec, n) << " P=" << P << " trials=" << spec.trials << " max_rel_err=";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3e", worst);
            out << buf << (ok ? " ok" : " FAIL") << '\n';
            if (!ok) {
                err << "verification failed: " << describe(spec, n) << " P=" << P << '\n';
                return kExitVerifyFailed;
            }
        }
    }
    return kExitOk;
}

std::vector<SweepRow> run_sweep(const RunSpec& spec) {
    std::vector<SweepRow> rows;
    NetOptions net{spec.workers};
    for (int n : spec.n) {
        const auto config = spec.config(n);
        const auto structure = build_structure(config);
        std::vector<SweepRow> block;
        std::vector<std::pair<int, double>> p_cost;
        for (int P : spec.procs) {
            auto plan = std::make_shared<const DistributionPlan>(structure,
                                                                 std::make_shared<const ProcessAssignment>(structure->tree(), P));
            SweepRow row;
            row.record = measure_run(config, distribute(config, plan), spec.trials, spec.cost, net);
            p_cost.emplace_back(P, row.record.sim_cost);
            block.push_back(std::move(row));
        }
        const int baseline = *std::min_element(spec.procs.begin(), spec.procs.end());
        const auto table = speedup_efficiency(p_cost, baseline);
        for (std::size_t i = 0; i < block.size(); ++i) {
            block[i].speedup = table[i].speedup;
            block[i].eff = table[i].eff;
            rows.push_back(std::move(block[i]));
        }
    }
    return rows;
}

std::string sweep_report(const RunSpec& spec, const std::vector<SweepRow>& rows) {
    if (spec.format == "json") return sweep_json(rows).dump(2) + "\n";
    return sweep_csv(rows);
}

int cmd_sweep(const RunSpec& spec, std::ostream& out, std::ostream&) {
    write_output(spec, sweep_report(spec, run_sweep(spec)), out);
    return kExitOk;
}

int cmd_inspect(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    const auto config = spec.config(spec.n.front());
    const auto structure = build_structure(config);
    nlohmann::json doc = {{"structure", structure_json(*structure)}};
    const bool with_procs = !(spec.procs.size() == 1 && spec.procs.front() == 1);
    if (with_procs) {
        nlohmann::json per_p = nlohmann::json::array();
        for (int P : spec.procs) {
            auto plan = std::make_shared<const DistributionPlan>(structure,
                                                                 std::make_shared<const ProcessAssignment>(structure->tree(), P));
            const auto dk = distribute(config, plan, StoreOptions{false});
            per_p.push_back({{"assignment", assignment_json(plan->assignment())}, {"stores", store_summary_json(dk)}});
        }
        doc["distributions"] = per_p;
    }
    const std::string json_text = doc.dump(2) + "\n";
    if (spec.format == "json" && spec.output.empty()) {
        out << json_text;
        return kExitOk;
    }
    out << describe(spec, spec.n.front()) << '\n';
    if (structure->tree().num_leaves() <= 256)
        out << block_raster(*structure);
    else
        err << "raster skipped: more than 256 leaves\n";
    if (!spec.output.empty()) write_output(spec, json_text, out);
    return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    int code = kExitOk;
    auto spec = parse_args(argc, argv, out, err, code);
    if (!spec) return code;
    try {
        spec->validate();
        if (spec->command == "verify") return cmd_verify(*spec, out, err);
        if (spec->command == "sweep") return cmd_sweep(*spec, out, err);
        return cmd_inspect(*spec, out, err);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

} // namespace hdist
