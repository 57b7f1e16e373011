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

#include "egl/counterexample.hpp"

#include <random>
#include <string>

#include "egl/errors.hpp"
#include "egl/losses.hpp"
#include "egl/problems.hpp"
#include "egl/sampling.hpp"

namespace egl {
namespace {

constexpr std::size_t kGridPoints = 15;

std::vector<double> noise_for(const CounterexampleConfig& config,
                              double offset, std::uint64_t stream) {
  std::vector<double> noise;
  if (config.grid == NoiseGrid::kFifteenPoint) {
    for (std::size_t k = 0; k < kGridPoints; ++k) {
      noise.push_back(offset + static_cast<double>(k) / 7.0);
    }
    return noise;
  }
  if (config.uniform_samples == 0) {
    throw ConfigError("counterexample: uniform grid needs K >= 1");
  }
  std::mt19937_64 rng(mix_seed(config.seed, stream));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t k = 0; k < config.uniform_samples; ++k) {
    noise.push_back(unit(rng));
  }
  return noise;
}

struct InstanceFit {
  std::vector<RegretRow> rows;
  double closed_form = 0.0;
  double fitted = 0.0;
};

InstanceFit fit_instance(double label_a, const std::vector<double>& noise,
                         const CounterexampleConfig& config) {
  const TopKProblem problem(2, 1);
  Vector y(2);
  y << label_a, kCounterexampleB;
  InstanceFit out;
  std::vector<CandidateSample> samples;
  for (std::size_t k = 0; k < noise.size(); ++k) {
    CandidateSample s;
    s.sample_index = k;
    s.prediction = y;
    s.prediction(0) += noise[k];
    s.regret = dq_regret(problem, s.prediction, y);
    out.rows.push_back({s.prediction(0), s.regret});
    samples.push_back(std::move(s));
  }
  out.closed_form = lz_closed_form_weight(samples, y);
  if (config.fit == WeightFit::kClosedForm) {
    out.fitted = out.closed_form;
  } else {
    LossFitConfig fit_config;
    fit_config.family = LossFamily::kLz;
    const LossFit fit = fit_lodl(samples, y, fit_config);
    out.fitted = fit.params.weights()(0);
  }
  return out;
}

}  // namespace

std::string_view to_string(NoiseGrid grid) {
  return grid == NoiseGrid::kFifteenPoint ? "grid15" : "uniform";
}

NoiseGrid noise_grid_from_string(std::string_view name) {
  if (name == "grid15") return NoiseGrid::kFifteenPoint;
  if (name == "uniform") return NoiseGrid::kUniform;
  throw ConfigError("unknown noise grid '" + std::string(name) + "'");
}

std::string_view to_string(WeightFit fit) {
  return fit == WeightFit::kClosedForm ? "closed_form" : "gradient_descent";
}

WeightFit weight_fit_from_string(std::string_view name) {
  if (name == "closed_form") return WeightFit::kClosedForm;
  if (name == "gradient_descent") return WeightFit::kGradientDescent;
  throw ConfigError("unknown weight fit '" + std::string(name) + "'");
}

CounterexampleOutcome counterexample_outcome(double weight_blue,
                                             double weight_orange) {
  const double labels[] = {0.0, 1.0};
  const double probs[] = {0.5, 0.5};
  const double weights[] = {weight_blue, weight_orange};
  CounterexampleOutcome out;
  out.weight_blue = weight_blue;
  out.weight_orange = weight_orange;
  out.prediction_a = optimal_wmse_prediction(labels, probs, weights);
  out.chosen = out.prediction_a > kCounterexampleB ? Individual::kA
                                                   : Individual::kB;
  // E[y_A] = 0.5 < 0.55, so B is the optimal allocation.
  out.consistent = out.chosen == Individual::kB;
  return out;
}

CounterexampleReport run_counterexample(const CounterexampleConfig& config) {
  const InstanceFit blue = fit_instance(0.0, noise_for(config, -1.0, 0), config);
  const InstanceFit orange =
      fit_instance(1.0, noise_for(config, -1.0, 1), config);
  CounterexampleReport report;
  report.blue = blue.rows;
  report.orange = orange.rows;
  report.closed_form_blue = blue.closed_form;
  report.closed_form_orange = orange.closed_form;
  report.fitted = counterexample_outcome(blue.fitted, orange.fitted);
  report.reported =
      counterexample_outcome(kReportedWeightBlue, kReportedWeightOrange);
  return report;
}

}  // namespace egl
