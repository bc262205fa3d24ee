#pragma once
//
// Command-line driver: verify, sweep and inspect.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or precondition error.
//

#include "hdist/report.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hdist {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;

/// Largest matrix size `verify` accepts.
inline constexpr std::int64_t kVerifyCap = kDefaultDensifyCap;
inline constexpr double kVerifyTolerance = 1e-10;

struct RunSpec {
    std::string command;
    int d = 1;
    std::vector<int> n{64};
    int leaf_size = 4;
    AdmissibilityKind adm = AdmissibilityKind::Weak;
    std::optional<double> rho;
    int r = 4;
    std::vector<int> procs{1};
    std::uint64_t seed = 0;
    int trials = 128;
    CostModel cost;
    std::string output;
    std::string format = "csv";
    int workers = 1;

    /// Effective rule; sqrt(d) when standard admissibility has no explicit rho.
    AdmissibilityRule rule() const;
    HMatrixConfig config(int n_value) const;
    void validate() const;
};

class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Parses argv (argv[0] is the program name).  Sets `exit_code` and returns
/// nullopt when parsing ends the run (help, or an error already reported).
std::optional<RunSpec> parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
                                  int& exit_code);

int cmd_verify(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_inspect(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Sweep rows in RunSpec order: n outer, P inner.  Speedups use the smallest P
/// of each n as baseline.
std::vector<SweepRow> run_sweep(const RunSpec& spec);
/// The report `sweep` writes, in the requested format.
std::string sweep_report(const RunSpec& spec, const std::vector<SweepRow>& rows);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hdist
