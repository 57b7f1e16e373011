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

// Two-individual allocation where per-instance loss weights make the
// population-optimal weighted-MSE prediction pick the wrong individual.
// Individual A's label is 0 ("blue" instance) or 1 ("orange") with
// probability 1/2 each; individual B always has 0.55. One resource goes to
// the larger prediction.

#ifndef EGL_COUNTEREXAMPLE_HPP_
#define EGL_COUNTEREXAMPLE_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

namespace egl {

enum class NoiseGrid {
  kFifteenPoint,  // noise -1 + k/7 on A, k = 0..14
  kUniform,       // K draws of U[-1, 1] added to A's label
};

enum class WeightFit { kClosedForm, kGradientDescent };

std::string_view to_string(NoiseGrid grid);
NoiseGrid noise_grid_from_string(std::string_view name);
std::string_view to_string(WeightFit fit);
WeightFit weight_fit_from_string(std::string_view name);

struct CounterexampleConfig {
  NoiseGrid grid = NoiseGrid::kFifteenPoint;
  std::size_t uniform_samples = 25;
  std::uint64_t seed = 0;
  WeightFit fit = WeightFit::kClosedForm;
};

inline constexpr double kCounterexampleB = 0.55;
// Externally reported per-instance weights, used only as fixture inputs.
inline constexpr double kReportedWeightBlue = 0.385;
inline constexpr double kReportedWeightOrange = 0.582;

struct RegretRow {
  double prediction_a = 0.0;
  double regret = 0.0;
};

enum class Individual { kA, kB };

struct CounterexampleOutcome {
  double weight_blue = 0.0;
  double weight_orange = 0.0;
  double prediction_a = 0.0;  // E[w y_A] / E[w]
  Individual chosen = Individual::kB;
  bool consistent = true;  // chosen == the population-optimal individual
};

struct CounterexampleReport {
  std::vector<RegretRow> blue;
  std::vector<RegretRow> orange;
  double closed_form_blue = 0.0;
  double closed_form_orange = 0.0;
  CounterexampleOutcome fitted;    // weights from config.fit
  CounterexampleOutcome reported;  // kReportedWeight* fixtures
};

// Outcome of a weight pair: ŷ_A and the resulting allocation.
CounterexampleOutcome counterexample_outcome(double weight_blue,
                                             double weight_orange);

CounterexampleReport run_counterexample(const CounterexampleConfig& config);

}  // namespace egl

#endif  // EGL_COUNTEREXAMPLE_HPP_
