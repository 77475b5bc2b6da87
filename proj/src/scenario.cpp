#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace partel {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTagChannels = 0x4348414eull;  // "CHAN"
constexpr std::uint64_t kTagSpeed = 0x53504430ull;     // "SPD0"
constexpr std::uint64_t kTagPower = 0x50575230ull;     // "PWR0"

void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace

SystemConfig SystemConfig::from_noise_density(std::size_t n, double bandwidth_hz,
                                              double noise_density_w_per_hz,
                                              double tau, double xi,
                                              std::uint64_t model_size) {
  SystemConfig c;
  c.num_subcarriers = n;
  c.subcarrier_bandwidth = bandwidth_hz;
  c.noise_power = noise_density_w_per_hz * bandwidth_hz;
  c.bits_per_parameter = tau;
  c.circuit_energy = xi;
  c.model_size = model_size;
  c.validate();
  return c;
}

void SystemConfig::validate() const {
  require(num_subcarriers >= 1, ErrorCode::invalid_argument,
          "config.num_subcarriers must be >= 1");
  require(subcarrier_bandwidth > 0.0, ErrorCode::invalid_argument,
          "config.subcarrier_bandwidth must be positive");
  require(noise_power > 0.0, ErrorCode::invalid_argument,
          "config.noise_power must be positive");
  require(bits_per_parameter >= 1.0, ErrorCode::invalid_argument,
          "config.bits_per_parameter must be >= 1");
  require(circuit_energy >= 0.0, ErrorCode::invalid_argument,
          "config.circuit_energy must be >= 0");
}

void WorkerProfile::validate(std::size_t k) const {
  const std::string who = "workers[" + std::to_string(k) + "]";
  require(compute_speed > 0.0, ErrorCode::invalid_argument,
          who + ".compute_speed must be positive");
  require(power_factor >= 0.0, ErrorCode::invalid_argument,
          who + ".power_factor must be >= 0");
  require(power_cap > 0.0, ErrorCode::invalid_argument,
          who + ".power_cap must be positive");
}

void Scenario::validate() const {
  config.validate();
  require(!workers.empty(), ErrorCode::invalid_argument,
          "scenario needs at least one worker");
  for (std::size_t k = 0; k < workers.size(); ++k) workers[k].validate(k);
  require(channels.rows == workers.size() &&
              channels.cols == config.num_subcarriers,
          ErrorCode::invalid_argument,
          "channels must be num_workers x num_subcarriers");
  for (std::size_t k = 0; k < channels.rows; ++k)
    for (std::size_t n = 0; n < channels.cols; ++n)
      require(channels(k, n) > 0.0 && std::isfinite(channels(k, n)),
              ErrorCode::invalid_argument,
              "channels[" + std::to_string(k) + "][" + std::to_string(n) +
                  "] must be a positive finite gain");
}

DistributionSpec DistributionSpec::defaults() {
  DistributionSpec d;
  for (int i = 1; i <= 10; ++i) {
    d.speed_choices.push_back(0.1 * i * 1e6);
    d.power_factor_choices.push_back(0.1 * i * 1e-16);
  }
  return d;
}

void DistributionSpec::validate() const {
  require(!speed_choices.empty(), ErrorCode::invalid_argument,
          "dist.speed_choices must be non-empty");
  require(!power_factor_choices.empty(), ErrorCode::invalid_argument,
          "dist.power_factor_choices must be non-empty");
  for (double f : speed_choices)
    require(f > 0.0, ErrorCode::invalid_argument,
            "dist.speed_choices entries must be positive");
  for (double g : power_factor_choices)
    require(g >= 0.0, ErrorCode::invalid_argument,
            "dist.power_factor_choices entries must be >= 0");
  require(power_cap > 0.0, ErrorCode::invalid_argument,
          "dist.power_cap must be positive");
  require(path_loss > 0.0, ErrorCode::invalid_argument,
          "dist.path_loss must be positive");
}

Scenario generate_scenario(std::size_t num_workers, const SystemConfig& config,
                           const DistributionSpec& dist, std::uint64_t seed) {
  require(num_workers >= 1, ErrorCode::invalid_argument,
          "num_workers must be >= 1");
  config.validate();
  dist.validate();

  Scenario s;
  s.config = config;
  s.seed = seed;
  s.workers.resize(num_workers);
  s.channels = Grid(num_workers, config.num_subcarriers);

  for (std::size_t k = 0; k < num_workers; ++k) {
    auto& w = s.workers[k];
    w.compute_speed =
        dist.speed_choices[bounded_index(mix_key(seed, kTagSpeed, k),
                                         dist.speed_choices.size())];
    w.power_factor = dist.power_factor_choices[bounded_index(
        mix_key(seed, kTagPower, k), dist.power_factor_choices.size())];
    w.power_cap = dist.power_cap;
    for (std::size_t n = 0; n < config.num_subcarriers; ++n) {
      // Exponential power gain via inverse CDF; 1-u keeps the draw in (0, 1].
      double u = uniform01(mix_key(seed, kTagChannels, k, n));
      s.channels(k, n) = -dist.path_loss * std::log1p(-u);
      if (s.channels(k, n) <= 0.0)  // u == 0 maps to 0; nudge off the boundary
        s.channels(k, n) = dist.path_loss * 0x1.0p-54;
    }
  }
  s.validate();
  return s;
}

// --- text format -----------------------------------------------------------
//
// Scenario files are JSON with fixed top-level keys: config, workers,
// channels, seed. Numbers round-trip exactly (shortest decimal form).

namespace {

json config_to_json(const SystemConfig& c) {
  return json{{"num_subcarriers", c.num_subcarriers},
              {"subcarrier_bandwidth", c.subcarrier_bandwidth},
              {"noise_power", c.noise_power},
              {"bits_per_parameter", c.bits_per_parameter},
              {"circuit_energy", c.circuit_energy},
              {"model_size", c.model_size}};
}

const json& need(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end())
    fail(ErrorCode::parse,
         std::string("scenario text missing field '") + key + "' in " + where);
  return *it;
}

double need_number(const json& j, const char* key, const char* where) {
  const json& f = need(j, key, where);
  if (!f.is_number())
    fail(ErrorCode::parse,
         std::string("scenario field '") + key + "' in " + where +
             " must be a number");
  return f.get<double>();
}

}  // namespace

std::string scenario_to_text(const Scenario& s) {
  json j;
  j["seed"] = s.seed;
  j["config"] = config_to_json(s.config);
  j["workers"] = json::array();
  for (const auto& w : s.workers)
    j["workers"].push_back(json{{"compute_speed", w.compute_speed},
                                {"power_factor", w.power_factor},
                                {"power_cap", w.power_cap}});
  j["channels"] = json::array();
  for (std::size_t k = 0; k < s.channels.rows; ++k) {
    json row = json::array();
    for (std::size_t n = 0; n < s.channels.cols; ++n)
      row.push_back(s.channels(k, n));
    j["channels"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

Scenario scenario_from_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse, std::string("scenario text is not valid: ") + e.what());
  }

  Scenario s;
  const json& seed = need(j, "seed", "top level");
  if (!seed.is_number_unsigned())
    fail(ErrorCode::parse, "scenario field 'seed' must be a non-negative integer");
  s.seed = seed.get<std::uint64_t>();

  const json& jc = need(j, "config", "top level");
  s.config.num_subcarriers =
      static_cast<std::size_t>(need_number(jc, "num_subcarriers", "config"));
  s.config.subcarrier_bandwidth =
      need_number(jc, "subcarrier_bandwidth", "config");
  s.config.noise_power = need_number(jc, "noise_power", "config");
  s.config.bits_per_parameter = need_number(jc, "bits_per_parameter", "config");
  s.config.circuit_energy = need_number(jc, "circuit_energy", "config");
  s.config.model_size =
      static_cast<std::uint64_t>(need_number(jc, "model_size", "config"));

  const json& jw = need(j, "workers", "top level");
  if (!jw.is_array() || jw.empty())
    fail(ErrorCode::parse, "scenario field 'workers' must be a non-empty list");
  for (std::size_t k = 0; k < jw.size(); ++k) {
    WorkerProfile w;
    const char* where = "workers entry";
    w.compute_speed = need_number(jw[k], "compute_speed", where);
    w.power_factor = need_number(jw[k], "power_factor", where);
    w.power_cap = need_number(jw[k], "power_cap", where);
    s.workers.push_back(w);
  }

  const json& jh = need(j, "channels", "top level");
  if (!jh.is_array() || jh.size() != s.workers.size())
    fail(ErrorCode::parse,
         "scenario field 'channels' must be a list with one row per worker");
  s.channels = Grid(s.workers.size(), s.config.num_subcarriers);
  for (std::size_t k = 0; k < jh.size(); ++k) {
    if (!jh[k].is_array() || jh[k].size() != s.config.num_subcarriers)
      fail(ErrorCode::parse,
           "scenario field 'channels' row " + std::to_string(k) +
               " must have num_subcarriers entries");
    for (std::size_t n = 0; n < s.config.num_subcarriers; ++n) {
      if (!jh[k][n].is_number())
        fail(ErrorCode::parse, "scenario field 'channels' must hold numbers");
      s.channels(k, n) = jh[k][n].get<double>();
    }
  }

  s.validate();
  return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
  s.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << scenario_to_text(s);
  if (!out) fail(ErrorCode::io, "failed while writing '" + path + "'");
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_text(buf.str());
}

}  // namespace partel
