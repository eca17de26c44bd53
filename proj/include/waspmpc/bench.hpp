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

#ifndef WASPMPC_BENCH_HPP_
#define WASPMPC_BENCH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "waspmpc/replan.hpp"

namespace waspmpc {

enum class TimingMode : std::uint8_t {
  kWall,  // monotonic-clock wall times
  kNone,  // zero out wall-time fields so reports compare byte for byte
};

std::string timing_mode_name(TimingMode mode);
TimingMode timing_mode_from_name(const std::string& name);

// Derivative-backend knobs echoed into every report. kind is "fd",
// "wasp", or "none" (sampling planners use no backend); the wasp fields
// are meaningful only for kind == "wasp" but always materialized.
struct BackendParams {
  std::string kind = "fd";
  double frac_x = 0.5;
  double tol_x = 0.5;
  double frac_u = 0.5;
  double tol_u = 0.5;
  double fd_epsilon = kDefaultFdEpsilon;
  std::uint64_t tangent_seed = 0;
  bool identity_tangents = false;
};

// Fully resolved configuration of one benchmark run. Every default is
// materialized here so a report alone reproduces its run.
struct RunConfig {
  int schema_version = 1;
  std::string experiment = "run";
  std::string task;
  std::string planner;
  std::string backend;  // backend label, "none" for sampling planners
  std::uint64_t seed = 0;
  int horizon = 0;
  double dt = 0.0;
  double sim_seconds = 0.0;
  std::string timing = "wall";
  int threads = 0;
  bool reset_wasp_each_replan = false;
  // Performance comparisons average the executed stage cost; the planner's
  // own predicted cost is not used for metrics.
  std::string cost_metric = "executed_stage_cost";
  PlannerConfig planner_params;
  BackendParams backend_params;
};

struct Aggregates {
  int replans = 0;
  double total_planning_time_s = 0.0;
  double avg_planning_time_s = 0.0;
  double total_md_time_s = 0.0;
  double avg_md_time_s = 0.0;
  std::int64_t total_dynamics_calls = 0;
  double avg_dynamics_calls = 0.0;
  std::int64_t total_md_dynamics_calls = 0;
  double avg_md_dynamics_calls = 0.0;
  double total_executed_cost = 0.0;
  double avg_executed_cost = 0.0;
  bool diverged = false;
};

struct BenchReport {
  RunConfig config;
  Aggregates aggregates;
  std::vector<ReplanRecord> records;
};

Aggregates compute_aggregates(const std::vector<ReplanRecord>& records,
                              bool diverged);

// Stable 64-bit digest of the pairing-relevant fields (task, seed,
// horizon, dt, sim_seconds). Two runs are comparable by the ratio metrics
// only when their digests match.
std::uint64_t pairing_hash(const RunConfig& config);

// Ratio of average model-derivative times, numerator / denominator; > 1
// means the denominator's backend produced derivatives faster. Requires
// matching pairing hash and planner. Throws ConfigMismatchError naming
// every differing field.
double md_speedup(const BenchReport& numerator, const BenchReport& denominator);

// Ratio of average planning times. Requires matching pairing hash; the
// planners may differ (cross-planner comparisons label the numerator
// planner in their summaries).
double speedup(const BenchReport& numerator, const BenchReport& denominator);

// Ratio of average executed costs, numerator / denominator; values >= 0.7
// count as success for the denominator's run. Requires matching pairing
// hash; the planners may differ.
double performance_ratio(const BenchReport& numerator,
                         const BenchReport& denominator);

inline constexpr double kPerformanceRatioSuccess = 0.7;

// "{experiment}_{task}_{planner}_{backend}_{seed}" without extension.
std::string report_basename(const RunConfig& config);

nlohmann::json to_json(const BenchReport& report);
BenchReport report_from_json(const nlohmann::json& j);
// CSV with the pinned header
// replan_index,planning_time_s,md_time_s,dynamics_calls,executed_cost
// and one row per replan, doubles printed with %.17g.
std::string csv_string(const BenchReport& report);

// Write <out_dir>/<basename>.json / .csv; return the full path written.
std::string write_json(const BenchReport& report, const std::string& out_dir);
std::string write_csv(const BenchReport& report, const std::string& out_dir);
BenchReport read_json(const std::string& path);

bool reports_equal(const BenchReport& a, const BenchReport& b);

// One complete benchmark episode: resolve the named task, run the
// receding-horizon loop, return records, aggregates, and the config echo.
struct EpisodeSpec {
  std::string experiment = "run";
  std::string task;
  PlannerKind planner = PlannerKind::kIlqg;
  std::string backend = "fd";  // "fd" | "wasp" | "none"
  WaspAxisSettings state_axis;
  WaspAxisSettings control_axis;
  double fd_epsilon = kDefaultFdEpsilon;
  std::uint64_t tangent_seed = 0;
  bool identity_tangents = false;
  std::uint64_t seed = 0;
  int horizon = 0;         // 0 keeps the task default
  double dt = 0.0;         // 0 keeps the task default
  double sim_seconds = 10.0;
  int iterations = 1;
  int num_samples = 0;     // 0 keeps the planner default
  double noise_scale = 0.0;  // 0 keeps the task suggestion
  bool reset_wasp_each_replan = false;
  int threads = 0;
  TimingMode timing = TimingMode::kWall;
};

BenchReport run_episode(const EpisodeSpec& spec);

struct ExperimentOptions {
  std::string out_dir = ".";
  std::vector<std::string> tasks;  // empty selects the experiment default
  double sim_seconds = 10.0;
  std::uint64_t seed = 0;
  int threads = 0;
  TimingMode timing = TimingMode::kWall;
  // Derivative planner used by the accuracy-tuning and head-to-head
  // experiments; the gradient-descent variant is opt-in.
  PlannerKind derivative_planner = PlannerKind::kIlqg;
  int num_samples = 0;  // 0 uses the per-task sampling defaults
};

struct ExperimentResult {
  std::vector<BenchReport> reports;
  nlohmann::json summary;
  std::vector<std::string> files_written;
};

// Accuracy-tuning sweep: per task, a plain-differencing baseline episode
// plus approximation episodes with tol fixed at 0.5 and frac raised from
// 0.3 in 0.1 steps until the performance ratio reaches 0.7. Emits JSON and
// CSV per run plus a summary of all three metrics.
ExperimentResult experiment1(const ExperimentOptions& options);

// Head-to-head: the derivative planner on the approximation backend
// against each sampling planner on the same tasks and seeds; emits
// speedup and performance ratio per pairing and flags a sampling planner
// whose average cost exceeds the reference by more than 1/0.7.
ExperimentResult experiment2(const ExperimentOptions& options);

// Parameter-sensitivity sweep on one task (default chain): five
// (frac_x, frac_u) settings (0.5,0.5) (0.5,0.3) (0.5,0.1) (0.3,0.5)
// (0.1,0.5) with tol 0.5 plus the differencing baseline, 10 simulated
// seconds (1000 replans at the default step). Writes exactly one CSV per
// run, six files total; the long-format sweep table goes into summary.
ExperimentResult experiment3(const ExperimentOptions& options);

}  // namespace waspmpc

#endif  // WASPMPC_BENCH_HPP_
