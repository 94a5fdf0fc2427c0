#pragma once

#include <string>

#include "json.hpp"

#include "ehjb/sde.hpp"
#include "ehjb/solve.hpp"

namespace ehjb {

using Json = nlohmann::json;

/// Node coordinates and value, one row per interior node, full precision.
void write_field_csv(const DiscreteField& field, const std::string& path);

/// Checkpointed paths as (path id, t, coordinates); falls back to one final
/// row per path when the batch carries no checkpoints.
void write_paths_csv(const TrajectoryBatch& batch, const std::string& path);

/// Serializes with sorted keys, two-space indent and a trailing newline, so
/// identical data yields identical bytes.
void write_json_file(const Json& j, const std::string& path);

Json grid_metadata(const Grid& grid);
Json to_json(const Vec& v);
Json to_json(const MarginReport& report);
Json to_json(const AssumptionReport& report);
Json to_json(const DiscountedSolution& sol);
Json to_json(const ErgodicSolution& sol, const std::string& field_csv_path);
Json to_json(const ExitStatistics& st);
Json to_json(const RefinementRow& row);
Json to_json(const ViabilityReport& rep);
Json to_json(const InvarianceReport& rep);
Json to_json(const MonteCarloValue& v);
Json to_json(const ExitValueReport& rep);
Json to_json(const LiouvilleReport& rep);
Json to_json(const UniquenessReport& rep);

std::string to_string(Condition c);

}  // namespace ehjb
