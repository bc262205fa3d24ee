#pragma once
//
// Serialized views of structures, assignments and sweep results.  Numbers are
// printed with fixed formats so equal inputs give byte-identical files.
//

#include "hdist/metrics.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace hdist {

nlohmann::json structure_json(const HMatrixStructure& structure);
/// One row per tree level: the group of every node on that level.
nlohmann::json assignment_json(const ProcessAssignment& assignment);
nlohmann::json store_summary_json(const DistributedHMatrix& k);

/// Leaf-by-leaf picture of the block structure: 'D' dense, 'L' low-rank.
/// Rows and columns follow the canonical leaf order.
std::string block_raster(const HMatrixStructure& structure, std::int64_t max_leaves = 256);

struct SweepRow {
    RunRecord record;
    double speedup = 0.0;
    double eff = 0.0;
};

/// Column order of sweep reports.
const std::vector<std::string>& sweep_columns();
std::string sweep_csv(const std::vector<SweepRow>& rows);
nlohmann::ordered_json sweep_json(const std::vector<SweepRow>& rows);

/// Fixed-point rendering used in reports.
std::string format_fixed(double v, int digits);

} // namespace hdist
