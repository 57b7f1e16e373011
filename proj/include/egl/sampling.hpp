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

// Candidate prediction generation (Gaussian perturbation of the labels, or
// checkpoints of models trained on MSE) and the regret dataset built from
// solving the downstream problem on each candidate.

#ifndef EGL_SAMPLING_HPP_
#define EGL_SAMPLING_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "egl/core.hpp"
#include "egl/tensor_nn.hpp"

namespace egl {

enum class SampleSource { kGaussian, kModel, kAnchor };

std::string_view to_string(SampleSource source);
SampleSource sample_source_from_string(std::string_view name);

struct Provenance {
  SampleSource source = SampleSource::kGaussian;
  double sigma = 0.0;              // kGaussian
  std::size_t model_index = 0;     // kModel
  std::size_t checkpoint_step = 0; // kModel
};

struct CandidateSample {
  std::uint64_t instance_id = 0;
  std::size_t sample_index = 0;
  Vector prediction;
  double regret = std::numeric_limits<double>::quiet_NaN();
  Provenance provenance;
  double solve_seconds = 0.0;

  bool has_regret() const { return !std::isnan(regret); }
};

enum class SamplerKind { kGaussian, kModelBased };

std::string_view to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(std::string_view name);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::kGaussian;
  std::size_t samples = 32;  // K per instance
  double sigma = 1.0;

  // Model-based sampling.
  std::size_t num_models = 5;
  double learning_rate = 0.1;
  LrSchedule schedule = LrSchedule::kConstant;
  double max_learning_rate = 1.0;
  std::size_t cycle_length = 100;
  std::size_t update_budget = 50000;  // across all models
  std::size_t batch_size = 8;
  bool include_initial_checkpoint = false;
  // Hidden widths of the sampled models; empty means linear.
  std::vector<std::size_t> hidden;

  std::uint64_t seed = 0;

  void validate() const;
};

// K draws of y + Normal(0, sigma^2) noise per coordinate.
std::vector<CandidateSample> gaussian_sample(const PtoInstance& instance,
                                             double sigma, std::size_t k,
                                             std::uint64_t seed);

using SampleMap = std::map<std::uint64_t, std::vector<CandidateSample>>;

// Checkpoint update counts of one sampler model: `count` steps equally spaced
// in [1, updates] (or starting at 0 when `include_initial`).
std::vector<std::size_t> checkpoint_steps(std::size_t updates,
                                          std::size_t count,
                                          bool include_initial);

// Trains config.num_models predictive models with plain SGD on MSE over
// `training` and records every target instance's predictions at equally
// spaced checkpoints. K = config.samples; when K is not divisible by the
// model count the remainder goes to the earliest models.
SampleMap model_based_sample(std::span<const PtoInstance* const> training,
                             std::span<const PtoInstance* const> targets,
                             const SamplerConfig& config);

// Fresh predictive model for instances shaped like `example`.
Mlp make_predictive_model(const PtoInstance& example,
                          std::span<const std::size_t> hidden,
                          std::uint64_t seed);

struct LossDatasetOptions {
  bool add_anchor = true;
  ExecutionPolicy policy = ExecutionPolicy::kParallel;
};

// Fills every sample's regret by solving the downstream problem, appends the
// zero-regret anchor y~ = y per instance and returns all samples ordered by
// (instance_id, sample_index).
std::vector<CandidateSample> build_loss_dataset(
    std::vector<CandidateSample> samples, const DecisionProblem& problem,
    std::span<const PtoInstance* const> instances,
    const LossDatasetOptions& options = {});

// Groups samples by instance id, preserving order.
SampleMap group_by_instance(std::vector<CandidateSample> samples);

}  // namespace egl

#endif  // EGL_SAMPLING_HPP_
