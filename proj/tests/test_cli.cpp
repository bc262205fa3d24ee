#include "hdist/cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace hdist;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "hdist");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Result r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

int column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::map<int, int> lowrank_per_level(const nlohmann::json& structure) {
    std::map<int, int> out;
    for (const auto& b : structure["blocks"])
        if (b["kind"] == "lowrank") ++out[b["level"].get<int>()];
    return out;
}

} // namespace

TEST(Cli, VerifyWeak2D) {
    const auto r = cli({"verify", "--d", "2", "--n", "16", "--adm", "weak", "--rank", "4", "--procs", "1,2,4,8", "--seed", "7",
                        "--trials", "8"});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(parse_csv(r.out).size(), 4u);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, VerifyRejectsTooManyRanks) {
    const auto r = cli({"verify", "--d", "1", "--n", "4", "--procs", "16"});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_NE(r.err.find("exceeds leaf count"), std::string::npos) << r.err;
}

TEST(Cli, VerifyDefaultRhoIsLogged) {
    const auto r = cli({"verify", "--d", "2", "--n", "16", "--adm", "standard", "--rho-default", "--trials", "4"});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("rho=1.414214"), std::string::npos) << r.out;
}

TEST(Cli, VerifyRejectsLargeMatrices) {
    const auto r = cli({"verify", "--d", "1", "--n", "8192"});
    EXPECT_EQ(r.code, kExitUsage);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli({}).code, kExitUsage);
    EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(cli({"verify", "--d", "4"}).code, kExitUsage);
    EXPECT_EQ(cli({"verify", "--adm", "strong"}).code, kExitUsage);
    EXPECT_EQ(cli({"verify", "--rho", "1.5", "--rho-default"}).code, kExitUsage);
    EXPECT_EQ(cli({"verify", "--n", "48"}).code, kExitUsage);
    EXPECT_EQ(cli({"sweep", "--format", "xml"}).code, kExitUsage);
    EXPECT_EQ(cli({"sweep", "--trials", "0"}).code, kExitUsage);
    EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, SweepColumnsAndDeterminism) {
    const std::vector<std::string> args{"sweep", "--d", "1", "--n", "256,512", "--procs", "2,4,8", "--trials", "2"};
    const auto a = cli(args);
    ASSERT_EQ(a.code, kExitOk) << a.err;
    const auto rows = parse_csv(a.out);
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_EQ(rows[0], sweep_columns());
    auto with_workers = args;
    with_workers.insert(with_workers.end(), {"--workers", "4"});
    EXPECT_EQ(cli(with_workers).out, a.out);
    EXPECT_EQ(cli(args).out, a.out);

    auto json_args = args;
    json_args.insert(json_args.end(), {"--format", "json"});
    const auto j = cli(json_args);
    ASSERT_EQ(j.code, kExitOk);
    const auto parsed = nlohmann::ordered_json::parse(j.out);
    ASSERT_EQ(parsed.size(), 6u);
    std::vector<std::string> keys;
    for (const auto& item : parsed[0].items()) keys.push_back(item.key());
    EXPECT_EQ(keys, sweep_columns());
    json_args.insert(json_args.end(), {"--workers", "3"});
    EXPECT_EQ(cli(json_args).out, j.out);
}

TEST(Cli, WorkerEnvDoesNotChangeOutput) {
    const std::vector<std::string> args{"sweep", "--d", "2", "--n", "16", "--leaf-size", "2", "--procs", "1,4,16", "--adm",
                                        "standard", "--trials", "1"};
    const auto base = cli(args);
    ::setenv("HDIST_WORKERS", "5", 1);
    const auto env = cli(args);
    ::unsetenv("HDIST_WORKERS");
    EXPECT_EQ(env.out, base.out);
}

TEST(Cli, SweepToFile) {
    const auto path = std::filesystem::temp_directory_path() / "hdist_cli_sweep.csv";
    const auto r = cli({"sweep", "--n", "64", "--procs", "1,2", "--trials", "1", "--output", path.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    EXPECT_EQ(text.str(), cli({"sweep", "--n", "64", "--procs", "1,2", "--trials", "1"}).out);
    std::filesystem::remove(path);
    EXPECT_NE(cli({"sweep", "--n", "64", "--output", "/nonexistent-dir/x.csv"}).code, kExitOk);
}

TEST(Cli, SweepMessagesGrowSlowly) {
    const auto r = cli({"sweep", "--d", "1", "--n", "4096", "--procs", "8,16,32", "--trials", "1"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto rows = parse_csv(r.out);
    const int c = column(rows[0], "comm_msgs");
    ASSERT_GE(c, 0);
    for (std::size_t i = 2; i < rows.size(); ++i) {
        const int prev = std::stoi(rows[i - 1][c]), cur = std::stoi(rows[i][c]);
        EXPECT_GE(cur, prev);
        EXPECT_LE(cur - prev, 8);
    }
}

TEST(Cli, WeakStrongScalingIsMonotone) {
    const auto r = cli({"sweep", "--d", "2", "--n", "64", "--procs", "1,2,4,8,16,32", "--trials", "1"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto rows = parse_csv(r.out);
    const int c = column(rows[0], "sim_cost");
    for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_LT(std::stod(rows[i][c]), std::stod(rows[i - 1][c]));
}

TEST(Cli, InspectWeak1D) {
    const auto r = cli({"inspect", "--d", "1", "--n", "8", "--leaf-size", "1"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> raster;
    while (std::getline(in, line)) raster.push_back(line);
    ASSERT_EQ(raster.size(), 8u);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) EXPECT_EQ(raster[i][j], i / 2 == j / 2 ? 'D' : 'L') << i << "," << j;

    const auto deep = cli({"inspect", "--d", "1", "--n", "16", "--leaf-size", "1", "--format", "json"});
    const auto counts = lowrank_per_level(nlohmann::json::parse(deep.out)["structure"]);
    EXPECT_EQ(counts, (std::map<int, int>{{1, 2}, {2, 4}, {3, 8}}));
}

TEST(Cli, InspectWeak2DRootPairs) {
    const auto r = cli({"inspect", "--d", "2", "--n", "4", "--leaf-size", "1", "--format", "json"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto counts = lowrank_per_level(nlohmann::json::parse(r.out)["structure"]);
    EXPECT_EQ(counts.at(1), 12);
}

TEST(Cli, InspectStandardBand) {
    const auto r = cli({"inspect", "--d", "1", "--n", "16", "--leaf-size", "1", "--adm", "standard"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    int row = 0;
    while (std::getline(in, line)) {
        for (int j = 0; j < 16; ++j) {
            // Dense within one neighbour pair of leaf pairs on either side.
            const bool near = std::abs(row / 2 - j / 2) <= 1;
            EXPECT_EQ(line[j], near ? 'D' : 'L') << row << "," << j;
        }
        ++row;
    }
    EXPECT_EQ(row, 16);
}

TEST(Cli, InspectWithDistribution) {
    const auto r = cli({"inspect", "--d", "1", "--n", "16", "--leaf-size", "1", "--procs", "4", "--format", "json"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_TRUE(j.contains("distributions"));
    EXPECT_EQ(j["distributions"].size(), 1u);
}
