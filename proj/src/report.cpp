#include "report.hpp"

#include <charconv>
#include <limits>
#include <cmath>
#include <fstream>

namespace partel {

namespace {

Grid grid_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty())
    fail(ErrorCode::parse, std::string("plan field '") + what +
                               "' must be a non-empty array of rows");
  Grid g(j.size(), j.at(0).size());
  for (std::size_t r = 0; r < g.rows; ++r) {
    const auto& row = j.at(r);
    if (!row.is_array() || row.size() != g.cols)
      fail(ErrorCode::parse, std::string("plan field '") + what +
                                 "' has ragged rows");
    for (std::size_t c = 0; c < g.cols; ++c)
      g(r, c) = row.at(c).get<double>();
  }
  return g;
}

nlohmann::json grid_to_json(const Grid& g) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < g.rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < g.cols; ++c) row.push_back(g(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0.0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_table(const std::string& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows,
                 char delimiter) {
  std::ofstream out(path, std::ios::binary);  // binary: no CRLF surprises
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << delimiter;
      out << cells[i];
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : rows) {
    if (row.size() != header.size())
      fail(ErrorCode::invalid_argument, "table row width mismatch");
    emit(row);
  }
  if (!out) fail(ErrorCode::io, "failed writing '" + path + "'");
}

nlohmann::json plan_to_json(const AllocationPlan& plan) {
  nlohmann::json j;
  j["assignment"] = grid_to_json(plan.assignment);
  j["subcarrier_loads"] = grid_to_json(plan.subcarrier_loads);
  j["rates"] = grid_to_json(plan.rates);
  j["worker_loads"] = plan.worker_loads;
  j["latency"] = plan.latency;
  return j;
}

AllocationPlan plan_from_json(const nlohmann::json& j) {
  AllocationPlan plan;
  plan.assignment = grid_from_json(j.at("assignment"), "assignment");
  plan.subcarrier_loads =
      grid_from_json(j.at("subcarrier_loads"), "subcarrier_loads");
  plan.rates = grid_from_json(j.at("rates"), "rates");
  plan.worker_loads = j.at("worker_loads").get<std::vector<double>>();
  // JSON has no infinity literal; an unfinished round serializes as null.
  const auto& lat = j.at("latency");
  plan.latency = lat.is_null() ? std::numeric_limits<double>::infinity()
                               : lat.get<double>();
  return plan;
}

nlohmann::json solve_result_to_json(const SolveResult& result) {
  nlohmann::json j;
  j["plan"] = plan_to_json(result.plan);
  j["achieved_model_size"] = result.achieved_model_size;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["duals"]["lambda"] = result.duals.lambda;
  j["duals"]["nu"] = result.duals.nu;
  j["duals"]["mu"] = result.duals.mu;
  j["duals"]["phi"] = result.duals.phi;
  return j;
}

void save_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::io, "failed writing '" + path + "'");
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, "invalid JSON in '" + path + "': " + e.what());
  }
  return j;
}

}  // namespace partel
