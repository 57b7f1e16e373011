// Copyright 2026 The EGL Lab Authors.
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

// End-to-end experiments: per trial, generate and split a dataset, sample
// candidate predictions, label them with regrets, fit a loss, train the
// predictive model on it and score normalized decision quality.

#ifndef EGL_HARNESS_HPP_
#define EGL_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egl/core.hpp"
#include "egl/datagen.hpp"
#include "egl/losses.hpp"
#include "egl/sampling.hpp"
#include "egl/serialization.hpp"
#include "egl/tensor_nn.hpp"

namespace egl {

// lodl: Gaussian samples, per-instance fits. egl_mbs: model-based samples,
// per-instance fits. egl_fbp: Gaussian samples, feature-based fit.
// egl_full: model-based samples, feature-based fit.
enum class Method {
  kTwoStageMse,
  kLzOneSample,
  kLodl,
  kEglMbs,
  kEglFbp,
  kEglFull,
};

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);
bool method_uses_family(Method method);

struct MethodSpec {
  Method method = Method::kTwoStageMse;
  LossFamily family = LossFamily::kWeightedMse;
  std::size_t samples = 32;

  // e.g. "egl_full/dwmse/32", "two_stage_mse".
  std::string label() const;
};

// Quantity monitored on validation instances for Step-4 early stopping.
// kLearnedLoss uses the method's own loss (MSE for two_stage_mse).
enum class StopMetric { kLearnedLoss, kRegret };
std::string_view to_string(StopMetric metric);
StopMetric stop_metric_from_string(std::string_view name);

struct ExperimentConfig {
  std::string name = "experiment";
  DatasetSpec dataset;
  std::vector<MethodSpec> methods;

  SamplerConfig gaussian;       // kind and samples are set per method
  SamplerConfig model_sampler;  // kind and samples are set per method
  std::vector<std::size_t> model_hidden;  // hidden widths of M_theta
  LossFitConfig lodl;                     // family is set per method
  FbpConfig fbp;                          // family is set per method
  TrainConfig fbp_train;
  TrainConfig model_train;
  StopMetric step4_stop = StopMetric::kLearnedLoss;

  std::size_t num_trials = 10;
  std::vector<std::uint64_t> seeds;  // empty: derived from `seed`
  std::uint64_t seed = 0;
  std::size_t baseline_draws = 100;
  ExecutionPolicy trial_policy = ExecutionPolicy::kParallel;

  // Throws ConfigError.
  void validate() const;
  std::vector<std::uint64_t> trial_seeds() const;
};

Json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const Json& j);

struct StepTimes {
  double sampling = 0.0;  // Step 1
  double dataset = 0.0;   // Step 2
  double fitting = 0.0;   // Step 3
  double training = 0.0;  // Step 4
  double total() const { return sampling + dataset + fitting + training; }
};

struct TrialResult {
  std::uint64_t seed = 0;
  bool aborted = false;
  std::string error;
  double test_ndq = 0.0;
  double validation_ndq = 0.0;
  double validation_mse = 0.0;
  std::size_t degenerate_skipped = 0;
  std::size_t updates = 0;
  StepTimes times;
};

struct Summary {
  double mean = 0.0;
  double sem = 0.0;  // sample stddev / sqrt(n); 0 when n < 2
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);

struct MethodReport {
  MethodSpec spec;
  std::vector<TrialResult> trials;

  std::vector<double> values(double TrialResult::*field) const;
  Summary test() const;
  Summary validation() const;
  Summary validation_mse() const;
  std::size_t aborted() const;
  StepTimes mean_times() const;
};

struct ExperimentReport {
  std::string name;
  Json config;
  std::vector<MethodReport> methods;

  // True when more than half the trials of some method aborted.
  bool failed() const;
  const MethodReport& find(const MethodSpec& spec) const;
  // Method/family with the best validation mean among `method` rows.
  const MethodReport& best_by_validation(Method method) const;
};

// Runs every method of the config on each trial. Stage errors abort only
// the affected (method, trial) cell and are recorded.
ExperimentReport run_experiment(const ExperimentConfig& config);

Json to_json(const ExperimentReport& report, bool include_timings = true);
ExperimentReport experiment_report_from_json(const Json& j);

// Aligned text: one row per method with test / validation means and SEM.
std::string format_table(const ExperimentReport& report);
// One CSV row per (method, trial).
std::string format_csv(const ExperimentReport& report);
// Mean per-step seconds per method; empty reports give an empty table.
std::string step_timing_summary(const ExperimentReport& report);

// Named reproduction bundles.
struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ReproOptions {
  std::optional<std::size_t> trials;  // override the bundle's trial count
  std::uint64_t seed = 20240601;
};

struct ReproResult {
  std::string name;
  std::vector<ExperimentReport> reports;
  std::vector<Check> checks;
  Json extra;  // bundle-specific tables

  bool passed() const;
};

// table1_cubic, table1_hard, table1_webadv, table1_portfolio,
// table2_ablation, table4_mse, step_cost, counterexample.
std::vector<std::string> repro_names();

// Desk-scale experiment presets; `domain` picks the per-domain model and
// sampler defaults.
ExperimentConfig desk_config(Domain domain, std::size_t trials,
                             std::uint64_t seed);

ReproResult run_repro(const std::string& name, const ReproOptions& options);

// Writes <out>/<name>.json, <name>.txt and one <name>.<n>.csv per report.
void write_repro(const ReproResult& result, const std::filesystem::path& out);

std::string format_checks(const ReproResult& result);

}  // namespace egl

#endif  // EGL_HARNESS_HPP_
