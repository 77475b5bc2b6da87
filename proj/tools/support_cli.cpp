// Command-line front end for the round-planning library. Talks to the
// shared library strictly through its C interface.

#include <partel/support.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

int exit_code(partel_status st) {
  if (st == PARTEL_OK) return kExitOk;
  return st == PARTEL_ERR_INFEASIBLE ? kExitInfeasible : kExitError;
}

[[nodiscard]] int complain(partel_status st) {
  std::cerr << "error: " << partel_last_error() << "\n";
  return exit_code(st);
}

// Shortest decimal that round-trips; keeps report files byte-stable.
std::string fmt(double v) {
  if (v != v) return "nan";
  if (v > 1.7976931348623157e308) return "inf";
  if (v < -1.7976931348623157e308) return "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct ScenarioHandle {
  partel_scenario* p = nullptr;
  ~ScenarioHandle() { partel_scenario_free(p); }
};

struct ResultHandle {
  partel_result* p = nullptr;
  ~ResultHandle() { partel_result_free(p); }
};

// Shared scenario-source flags: either a file or generator parameters.
struct ScenarioArgs {
  std::string path;
  std::size_t workers = 10;
  std::size_t subcarriers = 80;
  std::uint64_t seed = 1;
  std::uint64_t model_size = 0;  // 0 = keep the scenario's own size
  double power_cap = 0.0;        // 0 = default
  double circuit_energy = -1.0;  // <0 = default

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--scenario", path, "scenario JSON file (skips generation)");
    cmd->add_option("-k,--workers", workers, "worker count when generating");
    cmd->add_option("-n,--subcarriers", subcarriers,
                    "subcarrier count when generating");
    cmd->add_option("-s,--seed", seed, "generator seed");
    cmd->add_option("-L,--model-size", model_size,
                    "parameters per round (0 keeps the scenario's value)");
    cmd->add_option("--power-cap", power_cap, "per-worker power cap in watts");
    cmd->add_option("--circuit-energy", circuit_energy,
                    "per-round circuit energy in joules");
  }

  partel_status open(partel_scenario** out, std::uint64_t seed_override,
                     bool use_override) const {
    if (!path.empty()) {
      if (auto st = partel_scenario_load(path.c_str(), out)) return st;
      if (model_size) {
        if (auto st = partel_scenario_set_model_size(*out, model_size)) {
          partel_scenario_free(*out);
          *out = nullptr;
          return st;
        }
      }
      return PARTEL_OK;
    }
    partel_gen_params gp;
    partel_gen_params_defaults(&gp);
    gp.num_workers = workers;
    gp.num_subcarriers = subcarriers;
    if (model_size) gp.model_size = model_size;
    if (power_cap > 0.0) gp.power_cap = power_cap;
    if (circuit_energy >= 0.0) gp.circuit_energy = circuit_energy;
    return partel_scenario_generate(&gp, use_override ? seed_override : seed,
                                    out);
  }
};

partel_status parse_scheme(const std::string& name, partel_scheme* out) {
  if (name == "joint") *out = PARTEL_SCHEME_JOINT;
  else if (name == "proportional") *out = PARTEL_SCHEME_PROPORTIONAL;
  else if (name == "greedy") *out = PARTEL_SCHEME_GREEDY;
  else return PARTEL_ERR_INVALID_ARGUMENT;
  return PARTEL_OK;
}

int write_rows(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open '" << path << "' for writing\n";
    return kExitError;
  }
  out << header << '\n';
  for (const auto& r : rows) out << r << '\n';
  return out ? kExitOk : kExitError;
}

int run_gen(const ScenarioArgs& args, const std::string& out_path) {
  ScenarioHandle s;
  if (auto st = args.open(&s.p, 0, false)) return complain(st);
  if (auto st = partel_scenario_save(s.p, out_path.c_str()))
    return complain(st);
  std::cout << "scenario: " << partel_scenario_workers(s.p) << " workers, "
            << partel_scenario_subcarriers(s.p) << " subcarriers -> "
            << out_path << "\n";
  return kExitOk;
}

int run_solve(const ScenarioArgs& args, const std::string& scheme_name,
              double deadline, double tol, const std::string& out_path) {
  ScenarioHandle s;
  if (auto st = args.open(&s.p, 0, false)) return complain(st);

  ResultHandle r;
  if (deadline > 0.0) {
    if (auto st = partel_max_model_size(s.p, deadline, &r.p))
      return complain(st);
    std::cout << "deadline " << fmt(deadline) << " s fits "
              << fmt(partel_result_model_size(r.p)) << " parameters\n";
  } else {
    partel_scheme scheme;
    if (auto st = parse_scheme(scheme_name, &scheme)) {
      std::cerr << "error: unknown scheme '" << scheme_name << "'\n";
      return exit_code(st);
    }
    if (auto st = partel_min_latency(s.p, scheme, 0.0, &r.p))
      return complain(st);
    std::cout << scheme_name << " latency " << fmt(partel_result_latency(r.p))
              << " s for " << fmt(partel_result_model_size(r.p))
              << " parameters\n";
  }

  double worst = 0.0;
  if (auto st = partel_result_feasibility(r.p, s.p, tol, 0.0, &worst))
    return complain(st);
  std::cout << "worst constraint violation " << fmt(worst) << " (tolerance "
            << fmt(tol) << ")\n";
  if (!out_path.empty()) {
    if (auto st = partel_result_save(r.p, out_path.c_str()))
      return complain(st);
    std::cout << "result -> " << out_path << "\n";
  }
  return worst <= tol ? kExitOk : kExitInfeasible;
}

int run_compare(const ScenarioArgs& args, std::size_t num_seeds,
                const std::string& out_path) {
  static const char* kSchemes[] = {"joint", "proportional", "greedy"};
  std::vector<std::string> rows;
  double sum_prop = 0.0, sum_greedy = 0.0;
  std::size_t counted = 0;

  for (std::size_t i = 0; i < num_seeds; ++i) {
    const std::uint64_t seed = args.seed + i;
    ScenarioHandle s;
    if (auto st = args.open(&s.p, seed, true)) return complain(st);

    double latencies[3] = {0.0, 0.0, 0.0};
    for (int j = 0; j < 3; ++j) {
      partel_scheme scheme;
      (void)parse_scheme(kSchemes[j], &scheme);
      ResultHandle r;
      if (auto st = partel_min_latency(s.p, scheme, 0.0, &r.p))
        return complain(st);
      latencies[j] = partel_result_latency(r.p);
    }
    std::string row = std::to_string(seed);
    row += "," + std::to_string(partel_scenario_workers(s.p));
    row += "," + std::to_string(partel_scenario_subcarriers(s.p));
    for (double t : latencies) row += "," + fmt(t);
    rows.push_back(std::move(row));
    if (latencies[1] > 0.0 && latencies[2] > 0.0) {
      sum_prop += 1.0 - latencies[0] / latencies[1];
      sum_greedy += 1.0 - latencies[0] / latencies[2];
      ++counted;
    }
  }
  if (!out_path.empty()) {
    const int rc = write_rows(
        out_path, "seed,workers,subcarriers,joint,proportional,greedy", rows);
    if (rc != kExitOk) return rc;
    std::cout << "comparison -> " << out_path << "\n";
  }
  if (counted) {
    std::cout << "mean latency reduction vs proportional: "
              << fmt(100.0 * sum_prop / counted) << "%\n";
    std::cout << "mean latency reduction vs greedy: "
              << fmt(100.0 * sum_greedy / counted) << "%\n";
  }
  return kExitOk;
}

int run_sweep(const ScenarioArgs& args, const std::string& axis,
              std::vector<std::size_t> values, std::size_t num_seeds,
              const std::string& out_path) {
  if (axis != "workers" && axis != "subcarriers") {
    std::cerr << "error: sweep axis must be 'workers' or 'subcarriers'\n";
    return kExitError;
  }
  std::vector<std::string> rows;
  for (std::size_t value : values) {
    std::vector<double> latencies;
    for (std::size_t i = 0; i < num_seeds; ++i) {
      ScenarioArgs point = args;
      (axis == "workers" ? point.workers : point.subcarriers) = value;
      ScenarioHandle s;
      if (auto st = point.open(&s.p, args.seed + i, true)) return complain(st);
      ResultHandle r;
      if (auto st = partel_min_latency(s.p, PARTEL_SCHEME_JOINT, 0.0, &r.p))
        return complain(st);
      const double t = partel_result_latency(r.p);
      latencies.push_back(t);
      rows.push_back(axis + "," + std::to_string(value) + "," +
                     std::to_string(args.seed + i) + "," + fmt(t));
    }
    std::sort(latencies.begin(), latencies.end());
    const std::size_t m = latencies.size();
    const double median = m % 2 ? latencies[m / 2]
                                : 0.5 * (latencies[m / 2 - 1] +
                                         latencies[m / 2]);
    std::cout << axis << "=" << value << " median latency " << fmt(median)
              << " s over " << m << " seeds\n";
  }
  if (!out_path.empty()) {
    const int rc = write_rows(out_path, "axis,value,seed,latency", rows);
    if (rc != kExitOk) return rc;
    std::cout << "sweep -> " << out_path << "\n";
  }
  return kExitOk;
}

int run_simulate(const ScenarioArgs& args, const std::string& scheme_name,
                 const partel_sim_params& sim, const std::string& out_path) {
  ScenarioHandle s;
  if (auto st = args.open(&s.p, 0, false)) return complain(st);
  partel_scheme scheme;
  if (auto st = parse_scheme(scheme_name, &scheme)) {
    std::cerr << "error: unknown scheme '" << scheme_name << "'\n";
    return exit_code(st);
  }
  partel_trace* t = nullptr;
  if (auto st = partel_simulate(s.p, scheme, &sim, &t)) return complain(st);
  std::unique_ptr<partel_trace, decltype(&partel_trace_free)> owned(
      t, &partel_trace_free);

  const std::size_t rounds = partel_trace_rounds(t);
  if (rounds) {
    std::uint64_t round = 0;
    double lat = 0.0, cum = 0.0, loss = 0.0;
    (void)partel_trace_row(t, rounds - 1, &round, &lat, &cum, &loss);
    std::cout << scheme_name << ": " << rounds << " rounds, total "
              << fmt(cum) << " s, final loss " << fmt(loss) << "\n";
  }
  if (!out_path.empty()) {
    if (auto st = partel_trace_save(t, out_path.c_str())) return complain(st);
    std::cout << "trace -> " << out_path << "\n";
  }
  return kExitOk;
}

int run_plan_cnn(const ScenarioArgs& args, const std::string& stage_name,
                 std::uint64_t batch, std::uint64_t params,
                 const std::string& out_path) {
  ScenarioHandle s;
  if (auto st = args.open(&s.p, 0, false)) return complain(st);
  partel_cnn_stage stage;
  if (stage_name == "weights") stage = PARTEL_CNN_WEIGHTS;
  else if (stage_name == "activations") stage = PARTEL_CNN_ACTIVATIONS;
  else {
    std::cerr << "error: stage must be 'weights' or 'activations'\n";
    return kExitError;
  }
  partel_cnn_plan* p = nullptr;
  if (auto st = partel_plan_cnn(s.p, stage, batch, params, &p))
    return complain(st);
  std::unique_ptr<partel_cnn_plan, decltype(&partel_cnn_free)> owned(
      p, &partel_cnn_free);

  std::cout << "unit " << fmt(partel_cnn_unit(p)) << " parameters, relaxed "
            << fmt(partel_cnn_relaxed_latency(p)) << " s, bound "
            << fmt(partel_cnn_latency_bound(p)) << " s, "
            << partel_cnn_roundup_count(p) << " workers rounded up";
  if (partel_cnn_single_worker_fallback(p))
    std::cout << " (single-worker fallback)";
  std::cout << "\n";
  if (!out_path.empty()) {
    if (auto st = partel_cnn_save(p, out_path.c_str())) return complain(st);
    std::cout << "plan -> " << out_path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint subcarrier/load/power round planning"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a scenario file");
  ScenarioArgs gen_args;
  gen_args.add_flags(gen);
  std::string gen_out = "scenario.json";
  gen->add_option("-o,--out", gen_out, "output path");

  // solve
  auto* solve = app.add_subcommand("solve", "plan one round");
  ScenarioArgs solve_args;
  solve_args.add_flags(solve);
  std::string solve_scheme = "joint";
  double solve_deadline = 0.0, solve_tol = 1e-6;
  std::string solve_out;
  solve->add_option("--scheme", solve_scheme, "joint|proportional|greedy");
  solve->add_option("-T,--deadline", solve_deadline,
                    "fix the deadline and maximize the model instead");
  solve->add_option("--tol", solve_tol, "feasibility tolerance");
  solve->add_option("-o,--out", solve_out, "result JSON path");

  // compare
  auto* compare = app.add_subcommand("compare",
                                     "all schemes over a batch of seeds");
  ScenarioArgs compare_args;
  compare_args.add_flags(compare);
  std::size_t compare_seeds = 10;
  std::string compare_out;
  compare->add_option("--seeds", compare_seeds, "number of seeds");
  compare->add_option("-o,--out", compare_out, "CSV path");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "latency vs network size");
  ScenarioArgs sweep_args;
  sweep_args.add_flags(sweep);
  std::string sweep_axis = "workers";
  std::vector<std::size_t> sweep_values;
  std::size_t sweep_seeds = 20;
  std::string sweep_out;
  sweep->add_option("--axis", sweep_axis, "workers|subcarriers");
  sweep->add_option("--values", sweep_values, "axis values")->required();
  sweep->add_option("--seeds", sweep_seeds, "seeds per point");
  sweep->add_option("-o,--out", sweep_out, "CSV path");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "train over planned rounds");
  ScenarioArgs sim_args;
  sim_args.add_flags(simulate);
  std::string sim_scheme = "joint";
  partel_sim_params sim_params;
  partel_sim_params_defaults(&sim_params);
  std::string sim_out;
  bool sim_logistic = false, sim_l1 = false, sim_redraw = false;
  simulate->add_option("--scheme", sim_scheme, "joint|proportional|greedy");
  simulate->add_option("--rounds", sim_params.rounds, "training rounds");
  simulate->add_option("--samples", sim_params.num_samples, "dataset rows");
  simulate->add_option("--features", sim_params.num_features,
                       "model dimension");
  simulate->add_flag("--logistic", sim_logistic, "logistic link");
  simulate->add_flag("--l1", sim_l1, "lasso penalty");
  simulate->add_option("--reg", sim_params.reg_strength, "penalty strength");
  simulate->add_flag("--redraw-channels", sim_redraw,
                     "fresh fading every round");
  simulate->add_option("--data-seed", sim_params.data_seed, "dataset seed");
  simulate->add_option("-o,--out", sim_out, "trace CSV path");

  // plan-cnn
  auto* cnn = app.add_subcommand("plan-cnn",
                                 "granularity-constrained round plan");
  ScenarioArgs cnn_args;
  cnn_args.add_flags(cnn);
  std::string cnn_stage = "weights";
  std::uint64_t cnn_batch = 50, cnn_params = 0;
  std::string cnn_out;
  cnn->add_option("--stage", cnn_stage, "weights|activations");
  cnn->add_option("--batch", cnn_batch, "samples per activation round");
  cnn->add_option("--params", cnn_params,
                  "total parameters (0 keeps the reference shape)");
  cnn->add_option("-o,--out", cnn_out, "plan JSON path");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) return run_gen(gen_args, gen_out);
  if (solve->parsed())
    return run_solve(solve_args, solve_scheme, solve_deadline, solve_tol,
                     solve_out);
  if (compare->parsed())
    return run_compare(compare_args, compare_seeds, compare_out);
  if (sweep->parsed())
    return run_sweep(sweep_args, sweep_axis, sweep_values, sweep_seeds,
                     sweep_out);
  if (simulate->parsed()) {
    sim_params.logistic = sim_logistic ? 1 : 0;
    sim_params.l1 = sim_l1 ? 1 : 0;
    sim_params.redraw_channels = sim_redraw ? 1 : 0;
    return run_simulate(sim_args, sim_scheme, sim_params, sim_out);
  }
  if (cnn->parsed())
    return run_plan_cnn(cnn_args, cnn_stage, cnn_batch, cnn_params, cnn_out);
  return kExitError;
}
