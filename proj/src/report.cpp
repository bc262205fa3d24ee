#include "hdist/report.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace hdist {

std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

nlohmann::json structure_json(const HMatrixStructure& s) {
    using nlohmann::json;
    const auto& tree = s.tree();
    const auto& cfg = tree.config();
    json blocks = json::array();
    for (int i = 0; i < static_cast<int>(s.blocks().size()); ++i) {
        const HBlock& b = s.block(i);
        json path = json::array();
        for (const auto& [t, src] : b.id.path(cfg.d)) path.push_back({t, src});
        blocks.push_back({{"index", i},
                          {"level", b.id.level},
                          {"target", b.id.target_index},
                          {"source", b.id.source_index},
                          {"kind", to_string(b.kind)},
                          {"rows", s.rows(b)},
                          {"cols", s.cols(b)},
                          {"row_offset", tree.offset(b.target)},
                          {"col_offset", tree.offset(b.source)},
                          {"parent", b.parent},
                          {"path", path}});
    }
    json counts = json::array();
    for (int l = 0; l < tree.num_levels(); ++l)
        counts.push_back({{"level", l},
                          {"dense", s.count(BlockKind::Dense, l)},
                          {"lowrank", s.count(BlockKind::LowRank, l)},
                          {"hier", s.count(BlockKind::Hier, l)}});
    return {{"d", cfg.d},
            {"n", cfg.n},
            {"leaf_size", cfg.leaf_size},
            {"N", cfg.num_points()},
            {"adm", s.rule().name()},
            {"rho", format_fixed(s.rule().rho, 6)},
            {"r", s.rank()},
            {"levels", tree.num_levels()},
            {"stored_scalars", [&] {
                 std::int64_t t = 0;
                 for (int bi : s.data_blocks()) t += s.stored_scalars(s.block(bi));
                 return t;
             }()},
            {"flops", flop_count(s)},
            {"counts", counts},
            {"blocks", blocks}};
}

nlohmann::json assignment_json(const ProcessAssignment& a) {
    using nlohmann::json;
    const auto& tree = a.tree();
    json levels = json::array();
    for (int l = 0; l < tree.num_levels(); ++l) {
        json groups = json::array();
        for (std::int64_t k = 0; k < tree.nodes_at_level(l); ++k) {
            const auto& g = a.group_of(tree.node(l, k));
            groups.push_back({g.first, g.size});
        }
        levels.push_back({{"level", l}, {"groups", groups}});
    }
    json ranks = json::array();
    for (int p = 0; p < a.num_ranks(); ++p) {
        const auto& r = a.owned_range(p);
        json owned = json::array();
        for (NodeId id : a.owned_domains(p)) owned.push_back({tree.level_of(id), tree.index_in_level(id)});
        ranks.push_back({{"rank", p}, {"begin", r.begin}, {"end", r.end}, {"owned", owned}});
    }
    return {{"P", a.num_ranks()}, {"process_levels", a.process_levels()}, {"levels", levels}, {"ranks", ranks}};
}

nlohmann::json store_summary_json(const DistributedHMatrix& k) {
    using nlohmann::json;
    json ranks = json::array();
    for (const auto& st : k.stores)
        ranks.push_back({{"rank", st.rank},
                         {"stored_scalars", st.stored_scalars()},
                         {"source_tasks", st.source_tasks.size()},
                         {"target_tasks", st.target_tasks.size()},
                         {"reduce_length", st.reduce_length},
                         {"broadcast_length", st.broadcast_length},
                         {"peer_sends", st.peer_sends.size()},
                         {"peer_receives", st.peer_receives.size()},
                         {"planned_flops", st.planned_flops()}});
    const auto bal = measure_balance(k.stores);
    return {{"P", k.num_ranks()}, {"storage_balance", format_fixed(bal.factor, 6)}, {"ranks", ranks}};
}

std::string block_raster(const HMatrixStructure& s, std::int64_t max_leaves) {
    const auto& tree = s.tree();
    const std::int64_t leaves = tree.num_leaves();
    if (leaves > max_leaves)
        throw std::invalid_argument("raster needs at most " + std::to_string(max_leaves) + " leaves, tree has " +
                                    std::to_string(leaves));
    const std::int64_t leaf_dofs = tree.dofs_at_level(tree.leaf_level());
    std::vector<std::string> grid(leaves, std::string(leaves, '?'));
    for (int bi : s.data_blocks()) {
        const HBlock& b = s.block(bi);
        const std::int64_t r0 = tree.offset(b.target) / leaf_dofs, c0 = tree.offset(b.source) / leaf_dofs;
        const std::int64_t m = s.rows(b) / leaf_dofs, w = s.cols(b) / leaf_dofs;
        const char ch = b.kind == BlockKind::Dense ? 'D' : 'L';
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < w; ++j) grid[r0 + i][c0 + j] = ch;
    }
    std::string out;
    for (const auto& row : grid) out += row + '\n';
    return out;
}

const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols{
        "d", "n", "N", "adm", "r", "P", "seed", "trials",
        "step2_msgs", "step3_msgs", "step4_msgs",
        "step2_scalars", "step3_scalars", "step4_scalars",
        "comm_msgs", "storage_balance", "flop_balance", "sim_cost", "speedup", "eff"};
    return cols;
}

namespace {

std::vector<std::string> row_values(const SweepRow& row) {
    const RunRecord& r = row.record;
    return {std::to_string(r.d),
            std::to_string(r.n),
            std::to_string(r.N),
            r.adm == AdmissibilityKind::Weak ? "weak" : "standard",
            std::to_string(r.r),
            std::to_string(r.P),
            std::to_string(r.seed),
            std::to_string(r.trials),
            std::to_string(r.max_messages(2)),
            std::to_string(r.max_messages(3)),
            std::to_string(r.max_messages(4)),
            std::to_string(r.max_scalars(2)),
            std::to_string(r.max_scalars(3)),
            std::to_string(r.max_scalars(4)),
            std::to_string(r.max_comm_messages()),
            format_fixed(r.storage_balance, 6),
            format_fixed(r.flop_balance, 6),
            format_fixed(r.sim_cost, 4),
            format_fixed(row.speedup, 4),
            format_fixed(row.eff, 2)};
}

} // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    const auto& cols = sweep_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& row : rows) {
        const auto vals = row_values(row);
        for (std::size_t i = 0; i < vals.size(); ++i) os << (i ? "," : "") << vals[i];
        os << '\n';
    }
    return os.str();
}

nlohmann::ordered_json sweep_json(const std::vector<SweepRow>& rows) {
    // Values are kept as the same strings the CSV uses, except integers.
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    const auto& cols = sweep_columns();
    for (const auto& row : rows) {
        const auto vals = row_values(row);
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const auto& v = vals[i];
            const bool integer = !v.empty() && v.find_first_not_of("0123456789") == std::string::npos;
            if (integer) obj[cols[i]] = std::stoull(v);
            else if (cols[i] == "adm") obj[cols[i]] = v;
            else obj[cols[i]] = std::stod(v);
        }
        out.push_back(std::move(obj));
    }
    return out;
}

} // namespace hdist
