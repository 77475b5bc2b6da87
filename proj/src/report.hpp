#pragma once

// Deterministic result files. Everything written here must be byte-stable
// across runs with the same inputs: doubles use shortest round-trip form,
// object keys are sorted, and no timestamps or host details ever land in a
// report. Wall-clock measurements belong on stderr, not in files.

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "cost_model.hpp"
#include "scenario.hpp"
#include "solver.hpp"

namespace partel {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// One delimited text table; rows are pre-formatted cells.
void write_table(const std::string& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows,
                 char delimiter = ',');

nlohmann::json plan_to_json(const AllocationPlan& plan);
AllocationPlan plan_from_json(const nlohmann::json& j);

nlohmann::json solve_result_to_json(const SolveResult& result);

// Canonical on-disk JSON: sorted keys, two-space indent, trailing newline.
void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

}  // namespace partel
