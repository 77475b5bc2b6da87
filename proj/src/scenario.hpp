#pragma once

// Scenario: the physical system a round is planned for. Workers (edge
// devices) are described by compute speed, chip power factor, and a power
// cap; the OFDM uplink by per-(worker, subcarrier) channel power gains.

#include <cstdint>
#include <string>
#include <vector>

#include "util.hpp"

namespace partel {

struct SystemConfig {
  std::size_t num_subcarriers = 80;       // N
  double subcarrier_bandwidth = 312.5e3;  // B, Hz
  double noise_power = 3.125e-4;          // sigma^2 per subcarrier, W
  double bits_per_parameter = 32.0;       // tau
  double circuit_energy = 0.0;            // xi, J per round per worker
  std::uint64_t model_size = 1'240'000;   // L, parameters per round

  // Noise is configured as a spectral density and folded into per-subcarrier
  // power exactly once, here.
  static SystemConfig from_noise_density(std::size_t n, double bandwidth_hz,
                                         double noise_density_w_per_hz,
                                         double tau, double xi,
                                         std::uint64_t model_size);
  void validate() const;
};

struct WorkerProfile {
  double compute_speed = 1e6;   // f_k, parameters per second
  double power_factor = 1e-16;  // g_k, W / (params/s)^3
  double power_cap = 8.0;       // P_k, W

  void validate(std::size_t k) const;
};

struct Scenario {
  SystemConfig config;
  std::vector<WorkerProfile> workers;
  Grid channels;  // K x N power gains h_{k,n}, strictly positive
  std::uint64_t seed = 0;

  std::size_t num_workers() const { return workers.size(); }
  std::size_t num_subcarriers() const { return config.num_subcarriers; }
  void validate() const;
};

// Draw supports for generated scenarios. Speeds and power factors are picked
// uniformly from finite choice sets; channel gains are exponential with the
// given mean (Rayleigh fading around a mean path loss).
struct DistributionSpec {
  std::vector<double> speed_choices;
  std::vector<double> power_factor_choices;
  double power_cap = 8.0;
  double path_loss = 1e-3;

  static DistributionSpec defaults();
  void validate() const;
};

Scenario generate_scenario(std::size_t num_workers, const SystemConfig& config,
                           const DistributionSpec& dist, std::uint64_t seed);

void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(const std::string& path);

// Serialization used by save/load and by report sidecars.
std::string scenario_to_text(const Scenario& s);
Scenario scenario_from_text(const std::string& text);

}  // namespace partel
