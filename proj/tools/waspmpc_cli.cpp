// Copyright 2026 The waspmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "waspmpc/bench.hpp"
#include "waspmpc/errors.hpp"
#include "waspmpc/oracles.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CliOptions {
  std::string task = "lq";
  std::vector<std::string> tasks;  // bench may name several
  std::string planner = "ilqg";
  std::string backend = "fd";
  double frac_x = 0.5;
  double tol_x = 0.5;
  double frac_u = 0.5;
  double tol_u = 0.5;
  std::uint64_t seed = 0;
  int horizon = 0;
  double dt = 0.0;
  double sim_seconds = 0.0;  // per-subcommand default applied later
  int samples = 0;
  std::string out;
  int threads = 0;
  int iterations = 1;
  bool identity_tangents = false;
  std::uint64_t tangent_seed = 0;
  std::string timing = "wall";
  bool reset_wasp_each_replan = false;
  double fd_epsilon = waspmpc::kDefaultFdEpsilon;
  std::string config_path;
};

// Option handles needed after parsing: config-file values only apply to
// flags the user did not pass explicitly.
using OptionMap = std::map<std::string, CLI::Option*>;

void add_shared_flags(CLI::App* cmd, CliOptions& opt, OptionMap& handles) {
  handles["planner"] = cmd->add_option(
      "--planner", opt.planner,
      "planner: gd, ilqg, predictive, robust, cem, sample-gradient");
  handles["backend"] = cmd->add_option(
      "--backend", opt.backend, "derivative backend: fd or wasp");
  handles["frac_x"] = cmd->add_option(
      "--frac-x", opt.frac_x, "state-axis probe fraction, clamped to (0,1]");
  handles["tol_x"] = cmd->add_option(
      "--tol-x", opt.tol_x, "state-axis termination tolerance, clamped to [0,1]");
  handles["frac_u"] = cmd->add_option(
      "--frac-u", opt.frac_u, "control-axis probe fraction, clamped to (0,1]");
  handles["tol_u"] = cmd->add_option(
      "--tol-u", opt.tol_u,
      "control-axis termination tolerance, clamped to [0,1]");
  handles["seed"] = cmd->add_option("--seed", opt.seed, "random seed");
  handles["horizon"] =
      cmd->add_option("--horizon", opt.horizon, "planning horizon override");
  handles["dt"] = cmd->add_option("--dt", opt.dt, "timestep override");
  handles["sim_seconds"] = cmd->add_option("--sim-seconds", opt.sim_seconds,
                                           "simulated episode length");
  handles["samples"] = cmd->add_option(
      "--samples", opt.samples, "sampling-planner candidates per iteration");
  handles["out"] =
      cmd->add_option("--out", opt.out, "output directory for reports");
  handles["threads"] = cmd->add_option(
      "--threads", opt.threads, "derivative worker threads, 0 = sequential");
  handles["iterations"] = cmd->add_option("--iterations", opt.iterations,
                                          "optimizer passes per plan call");
  handles["identity_tangents"] =
      cmd->add_flag("--identity-tangents", opt.identity_tangents,
                    "probe along coordinate axes instead of a random basis");
  handles["tangent_seed"] = cmd->add_option("--tangent-seed", opt.tangent_seed,
                                            "seed of the probe bases");
  handles["timing"] = cmd->add_option(
      "--timing", opt.timing, "wall (default) or none for byte-stable reports");
  handles["reset_wasp_each_replan"] =
      cmd->add_flag("--reset-wasp-each-replan", opt.reset_wasp_each_replan,
                    "drop approximation state before every replan");
  handles["fd_epsilon"] = cmd->add_option("--fd-epsilon", opt.fd_epsilon,
                                          "finite-difference step size");
  handles["config"] = cmd->add_option("--config", opt.config_path,
                                      "JSON file with flag defaults");
}

// Values from the config file fill in for flags absent from argv. Keys
// mirror the flag names with underscores.
void apply_config_file(CliOptions& opt, const OptionMap& handles) {
  if (opt.config_path.empty()) return;
  std::ifstream in(opt.config_path);
  if (!in) {
    throw waspmpc::InvalidArgumentError("--config: cannot open " +
                                        opt.config_path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw waspmpc::InvalidArgumentError("--config: " + opt.config_path +
                                        " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) {
    throw waspmpc::InvalidArgumentError("--config: top level must be an object");
  }

  const auto unset = [&handles](const std::string& key) {
    const auto it = handles.find(key);
    return it != handles.end() && it->second->count() == 0;
  };
  try {
    if (j.contains("task") && unset("task")) {
      opt.task = j["task"].get<std::string>();
      opt.tasks = {opt.task};
    }
    if (j.contains("planner") && unset("planner")) {
      opt.planner = j["planner"].get<std::string>();
    }
    if (j.contains("backend") && unset("backend")) {
      opt.backend = j["backend"].get<std::string>();
    }
    if (j.contains("frac_x") && unset("frac_x")) {
      opt.frac_x = j["frac_x"].get<double>();
    }
    if (j.contains("tol_x") && unset("tol_x")) {
      opt.tol_x = j["tol_x"].get<double>();
    }
    if (j.contains("frac_u") && unset("frac_u")) {
      opt.frac_u = j["frac_u"].get<double>();
    }
    if (j.contains("tol_u") && unset("tol_u")) {
      opt.tol_u = j["tol_u"].get<double>();
    }
    if (j.contains("seed") && unset("seed")) {
      opt.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("horizon") && unset("horizon")) {
      opt.horizon = j["horizon"].get<int>();
    }
    if (j.contains("dt") && unset("dt")) opt.dt = j["dt"].get<double>();
    if (j.contains("sim_seconds") && unset("sim_seconds")) {
      opt.sim_seconds = j["sim_seconds"].get<double>();
    }
    if (j.contains("samples") && unset("samples")) {
      opt.samples = j["samples"].get<int>();
    }
    if (j.contains("out") && unset("out")) {
      opt.out = j["out"].get<std::string>();
    }
    if (j.contains("threads") && unset("threads")) {
      opt.threads = j["threads"].get<int>();
    }
    if (j.contains("iterations") && unset("iterations")) {
      opt.iterations = j["iterations"].get<int>();
    }
    if (j.contains("identity_tangents") && unset("identity_tangents")) {
      opt.identity_tangents = j["identity_tangents"].get<bool>();
    }
    if (j.contains("tangent_seed") && unset("tangent_seed")) {
      opt.tangent_seed = j["tangent_seed"].get<std::uint64_t>();
    }
    if (j.contains("timing") && unset("timing")) {
      opt.timing = j["timing"].get<std::string>();
    }
    if (j.contains("reset_wasp_each_replan") &&
        unset("reset_wasp_each_replan")) {
      opt.reset_wasp_each_replan = j["reset_wasp_each_replan"].get<bool>();
    }
    if (j.contains("fd_epsilon") && unset("fd_epsilon")) {
      opt.fd_epsilon = j["fd_epsilon"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw waspmpc::InvalidArgumentError(
        std::string("--config: bad value type: ") + e.what());
  }
}

std::string resolve_out_dir(const CliOptions& opt, const OptionMap& handles) {
  const auto it = handles.find("out");
  const bool flag_given = it != handles.end() && it->second->count() > 0;
  if (flag_given || !opt.out.empty()) return opt.out.empty() ? "." : opt.out;
  if (const char* env = std::getenv("WASP_MPC_OUT"); env != nullptr && *env) {
    return env;
  }
  return ".";
}

void clamp_wasp_params(CliOptions& opt) {
  const auto clamp_axis = [](double& frac, double& tol, const char* fflag) {
    if (!(frac > 0.0)) {
      throw waspmpc::InvalidArgumentError(
          std::string(fflag) + ": probe fraction must be in (0, 1], got " +
          std::to_string(frac));
    }
    if (frac > 1.0) frac = 1.0;
    if (tol < 0.0) tol = 0.0;
    if (tol > 1.0) tol = 1.0;
  };
  clamp_axis(opt.frac_x, opt.tol_x, "--frac-x");
  clamp_axis(opt.frac_u, opt.tol_u, "--frac-u");
}

// Name validation happens before any computation so a typo cannot burn
// minutes of benchmark time first.
void validate_names(const CliOptions& opt, bool derivative_only) {
  const waspmpc::PlannerKind kind = waspmpc::planner_from_name(opt.planner);
  if (derivative_only && !waspmpc::planner_needs_backend(kind)) {
    throw waspmpc::InvalidArgumentError(
        "--planner: experiments take a derivative planner here (gd, ilqg), "
        "got " +
        opt.planner);
  }
  if (opt.backend != "fd" && opt.backend != "wasp") {
    throw waspmpc::InvalidArgumentError(
        "--backend: unknown backend '" + opt.backend + "' (valid: fd, wasp)");
  }
  (void)waspmpc::timing_mode_from_name(opt.timing);
}

waspmpc::EpisodeSpec episode_spec(const CliOptions& opt) {
  waspmpc::EpisodeSpec spec;
  spec.experiment = "plan";
  spec.task = opt.task;
  spec.planner = waspmpc::planner_from_name(opt.planner);
  spec.backend =
      waspmpc::planner_needs_backend(spec.planner) ? opt.backend : "none";
  spec.state_axis = {opt.frac_x, opt.tol_x};
  spec.control_axis = {opt.frac_u, opt.tol_u};
  spec.fd_epsilon = opt.fd_epsilon;
  spec.tangent_seed = opt.tangent_seed;
  spec.identity_tangents = opt.identity_tangents;
  spec.seed = opt.seed;
  spec.horizon = opt.horizon;
  spec.dt = opt.dt;
  spec.sim_seconds = opt.sim_seconds;
  spec.iterations = opt.iterations;
  spec.num_samples = opt.samples;
  spec.reset_wasp_each_replan = opt.reset_wasp_each_replan;
  spec.threads = opt.threads;
  spec.timing = waspmpc::timing_mode_from_name(opt.timing);
  return spec;
}

int run_plan(CliOptions& opt, const OptionMap& handles) {
  if (opt.sim_seconds <= 0.0) opt.sim_seconds = 2.0;
  clamp_wasp_params(opt);
  (void)waspmpc::find_task(opt.task);
  validate_names(opt, /*derivative_only=*/false);

  const waspmpc::BenchReport report = waspmpc::run_episode(episode_spec(opt));
  const std::string out_dir = resolve_out_dir(opt, handles);
  const std::string json_path = waspmpc::write_json(report, out_dir);
  const std::string csv_path = waspmpc::write_csv(report, out_dir);

  const waspmpc::Aggregates& agg = report.aggregates;
  std::printf("task            %s\n", report.config.task.c_str());
  std::printf("planner         %s\n", report.config.planner.c_str());
  std::printf("backend         %s\n", report.config.backend.c_str());
  std::printf("seed            %llu\n",
              static_cast<unsigned long long>(report.config.seed));
  std::printf("replans         %d%s\n", agg.replans,
              agg.diverged ? "  (diverged)" : "");
  std::printf("avg cost        %.6g\n", agg.avg_executed_cost);
  std::printf("total cost      %.6g\n", agg.total_executed_cost);
  std::printf("avg plan time   %.3f ms\n", 1e3 * agg.avg_planning_time_s);
  std::printf("avg deriv time  %.3f ms\n", 1e3 * agg.avg_md_time_s);
  std::printf("avg calls       %.1f (deriv %.1f)\n", agg.avg_dynamics_calls,
              agg.avg_md_dynamics_calls);
  std::printf("wrote           %s\n", json_path.c_str());
  std::printf("wrote           %s\n", csv_path.c_str());
  return agg.diverged ? kExitFailure : kExitOk;
}

int run_bench(const std::string& experiment, CliOptions& opt,
              const OptionMap& handles) {
  if (opt.sim_seconds <= 0.0) opt.sim_seconds = 10.0;
  clamp_wasp_params(opt);
  validate_names(opt, /*derivative_only=*/true);
  for (const std::string& task : opt.tasks) (void)waspmpc::find_task(task);
  if (opt.threads > 0) {
    std::fprintf(stderr,
                 "warning: --threads %d enables concurrency; timing-sensitive "
                 "comparisons are usually run sequentially\n",
                 opt.threads);
  }

  waspmpc::ExperimentOptions exp;
  exp.out_dir = resolve_out_dir(opt, handles);
  exp.tasks = opt.tasks;
  exp.sim_seconds = opt.sim_seconds;
  exp.seed = opt.seed;
  exp.threads = opt.threads;
  exp.timing = waspmpc::timing_mode_from_name(opt.timing);
  exp.derivative_planner = waspmpc::planner_from_name(opt.planner);
  exp.num_samples = opt.samples;

  waspmpc::ExperimentResult result;
  if (experiment == "exp1") {
    result = waspmpc::experiment1(exp);
    std::printf("%-10s %-6s %-6s %12s %12s %12s  %s\n", "task", "frac", "tol",
                "md_speedup", "speedup", "perf_ratio", "success");
    for (const auto& row : result.summary) {
      std::printf("%-10s %-6.2f %-6.2f %12.4f %12.4f %12.4f  %s\n",
                  row.at("task").get<std::string>().c_str(),
                  row.at("frac").get<double>(), row.at("tol").get<double>(),
                  row.at("md_speedup").get<double>(),
                  row.at("speedup").get<double>(),
                  row.at("performance_ratio").get<double>(),
                  row.at("success").get<bool>() ? "yes" : "NO");
    }
  } else if (experiment == "exp2") {
    result = waspmpc::experiment2(exp);
    std::printf("%-10s %-16s %8s %12s %12s  %s\n", "task", "planner", "samples",
                "speedup", "perf_ratio", "failure");
    for (const auto& row : result.summary) {
      std::printf("%-10s %-16s %8d %12.4f %12.4f  %s\n",
                  row.at("task").get<std::string>().c_str(),
                  row.at("planner").get<std::string>().c_str(),
                  row.at("samples").get<int>(),
                  row.at("speedup").get<double>(),
                  row.at("performance_ratio").get<double>(),
                  row.at("failure").get<bool>() ? "FAIL" : "-");
    }
  } else if (experiment == "exp3") {
    result = waspmpc::experiment3(exp);
    std::printf("%-24s %-7s %-7s %14s %14s %14s %12s\n", "backend", "frac_x",
                "frac_u", "avg_cost", "cost_var", "avg_md_calls",
                "md_speedup");
    for (const auto& row : result.summary) {
      std::printf("%-24s %-7.2f %-7.2f %14.6g %14.6g %14.1f %12.4f\n",
                  row.at("backend").get<std::string>().c_str(),
                  row.at("frac_x").get<double>(),
                  row.at("frac_u").get<double>(),
                  row.at("avg_executed_cost").get<double>(),
                  row.at("executed_cost_variance").get<double>(),
                  row.at("avg_md_dynamics_calls").get<double>(),
                  row.at("md_speedup_vs_fd").get<double>());
    }
  } else {
    throw waspmpc::InvalidArgumentError("unknown experiment '" + experiment +
                                        "' (valid: exp1, exp2, exp3)");
  }

  for (const std::string& path : result.files_written) {
    std::printf("wrote %s\n", path.c_str());
  }
  return kExitOk;
}

int run_verify(const CliOptions& opt) {
  const std::vector<waspmpc::oracles::CheckResult> checks =
      waspmpc::oracles::run_verification(opt.seed);
  bool all_passed = true;
  for (const waspmpc::oracles::CheckResult& check : checks) {
    std::printf("[%s] %s: %s\n", check.passed ? "PASS" : "FAIL",
                check.name.c_str(), check.detail.c_str());
    all_passed = all_passed && check.passed;
  }
  return all_passed ? kExitOk : kExitFailure;
}

int run_list() {
  std::printf("tasks:\n");
  for (const waspmpc::TaskSpec& task : waspmpc::builtin_tasks()) {
    std::printf("  %-14s state_dim=%-3d control_dim=%-2d horizon=%-3d dt=%g%s\n",
                task.name.c_str(), task.state_dim, task.control_dim,
                task.horizon, task.dt, task.benchmark ? "  [benchmark]" : "");
  }
  std::printf("planners:\n");
  const waspmpc::PlannerKind kinds[] = {
      waspmpc::PlannerKind::kGradientDescent, waspmpc::PlannerKind::kIlqg,
      waspmpc::PlannerKind::kPredictiveSampling,
      waspmpc::PlannerKind::kRobustSampling, waspmpc::PlannerKind::kCrossEntropy,
      waspmpc::PlannerKind::kSampleGradient};
  for (const waspmpc::PlannerKind kind : kinds) {
    std::printf("  %-16s %s\n", waspmpc::planner_name(kind).c_str(),
                waspmpc::planner_needs_backend(kind) ? "derivative-based"
                                                     : "sampling-based");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"receding-horizon planning toolkit"};
  app.require_subcommand(1);

  CliOptions opt;
  OptionMap plan_handles;
  OptionMap bench_handles;

  CLI::App* plan_cmd = app.add_subcommand("plan", "run one episode");
  plan_handles["task"] =
      plan_cmd->add_option("--task", opt.task, "task name (see `list`)");
  add_shared_flags(plan_cmd, opt, plan_handles);

  CLI::App* bench_cmd =
      app.add_subcommand("bench", "run a benchmark experiment");
  std::string experiment;
  bench_cmd->add_option("experiment", experiment, "exp1, exp2, or exp3")
      ->required();
  bench_handles["task"] = bench_cmd->add_option(
      "--task", opt.tasks, "task name, repeatable (default per experiment)");
  add_shared_flags(bench_cmd, opt, bench_handles);

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run the self-verification suite");
  verify_cmd->add_option("--seed", opt.seed, "random seed");

  CLI::App* list_cmd =
      app.add_subcommand("list", "list builtin tasks and planners");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(plan_cmd)) {
      apply_config_file(opt, plan_handles);
      return run_plan(opt, plan_handles);
    }
    if (app.got_subcommand(bench_cmd)) {
      apply_config_file(opt, bench_handles);
      return run_bench(experiment, opt, bench_handles);
    }
    if (app.got_subcommand(verify_cmd)) return run_verify(opt);
    if (app.got_subcommand(list_cmd)) return run_list();
  } catch (const waspmpc::InvalidArgumentError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const waspmpc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
