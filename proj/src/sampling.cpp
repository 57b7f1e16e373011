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

#include "egl/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <tuple>

#include "egl/kernels.hpp"

namespace egl {

std::string_view to_string(SampleSource source) {
  switch (source) {
    case SampleSource::kGaussian:
      return "gaussian";
    case SampleSource::kModel:
      return "model";
    case SampleSource::kAnchor:
      return "anchor";
  }
  return "unknown";
}

SampleSource sample_source_from_string(std::string_view name) {
  if (name == "gaussian") return SampleSource::kGaussian;
  if (name == "model") return SampleSource::kModel;
  if (name == "anchor") return SampleSource::kAnchor;
  throw InputError("unknown sample provenance '" + std::string(name) + "'");
}

std::string_view to_string(SamplerKind kind) {
  return kind == SamplerKind::kGaussian ? "gaussian" : "model_based";
}

SamplerKind sampler_kind_from_string(std::string_view name) {
  if (name == "gaussian") return SamplerKind::kGaussian;
  if (name == "model_based" || name == "model") return SamplerKind::kModelBased;
  throw ConfigError("unknown sampler '" + std::string(name) + "'");
}

void SamplerConfig::validate() const {
  if (samples == 0) throw ConfigError("sampler: K must be >= 1");
  if (!(sigma >= 0.0)) throw ConfigError("sampler: sigma must be >= 0");
  if (kind == SamplerKind::kModelBased) {
    if (num_models == 0) throw ConfigError("sampler: num_models must be >= 1");
    if (batch_size == 0) throw ConfigError("sampler: batch size must be >= 1");
    const std::size_t per_model = samples / num_models + (samples % num_models != 0);
    const std::size_t updates = update_budget / num_models;
    if (update_budget > 0 && updates < per_model) {
      throw ConfigError("sampler: " + std::to_string(updates) +
                        " updates per model cannot host " +
                        std::to_string(per_model) + " checkpoints");
    }
  }
}

std::vector<CandidateSample> gaussian_sample(const PtoInstance& instance,
                                             double sigma, std::size_t k,
                                             std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InputError("gaussian_sample: sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<CandidateSample> out;
  out.reserve(k);
  for (std::size_t s = 0; s < k; ++s) {
    CandidateSample sample;
    sample.instance_id = instance.id;
    sample.sample_index = s;
    sample.prediction = instance.labels;
    for (Eigen::Index i = 0; i < sample.prediction.size(); ++i) {
      sample.prediction(i) += sigma * noise(rng);
    }
    sample.provenance = {.source = SampleSource::kGaussian, .sigma = sigma};
    out.push_back(std::move(sample));
  }
  return out;
}

std::vector<std::size_t> checkpoint_steps(std::size_t updates,
                                          std::size_t count,
                                          bool include_initial) {
  std::vector<std::size_t> steps;
  steps.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    const double index = static_cast<double>(include_initial ? t : t + 1);
    steps.push_back(static_cast<std::size_t>(std::llround(
        index * static_cast<double>(updates) / static_cast<double>(count))));
  }
  return steps;
}

Mlp make_predictive_model(const PtoInstance& example,
                          std::span<const std::size_t> hidden,
                          std::uint64_t seed) {
  std::vector<std::size_t> widths;
  widths.push_back(static_cast<std::size_t>(example.features.front().size()));
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(example.outputs_per_feature());
  Mlp model(std::move(widths));
  model.init_he_uniform(seed);
  return model;
}

SampleMap model_based_sample(std::span<const PtoInstance* const> training,
                             std::span<const PtoInstance* const> targets,
                             const SamplerConfig& config) {
  config.validate();
  if (training.empty()) throw InputError("model_based_sample: no training data");

  std::vector<Matrix> inputs;
  std::vector<Vector> labels;
  for (const auto* inst : training) {
    inputs.push_back(feature_matrix(*inst));
    labels.push_back(inst->labels);
  }
  const MseObjective objective(std::move(inputs), std::move(labels));
  std::vector<Matrix> target_inputs;
  for (const auto* inst : targets) target_inputs.push_back(feature_matrix(*inst));

  SampleMap out;
  for (const auto* inst : targets) out[inst->id];

  const std::size_t updates = config.update_budget / config.num_models;
  for (std::size_t m = 0; m < config.num_models; ++m) {
    const std::size_t count = config.samples / config.num_models +
                              (m < config.samples % config.num_models ? 1 : 0);
    if (count == 0) continue;
    const auto steps =
        checkpoint_steps(updates, count, config.include_initial_checkpoint);
    Mlp model = make_predictive_model(*training.front(), config.hidden,
                                      mix_seed(config.seed, 2 * m));
    std::mt19937_64 rng(mix_seed(config.seed, 2 * m + 1));
    Optimizer sgd(OptimizerKind::kSgd, model.num_params());
    std::vector<std::size_t> order(objective.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = order.size();
    std::size_t next = 0;

    const auto record = [&](std::size_t step) {
      for (std::size_t t = 0; t < targets.size(); ++t) {
        auto& bucket = out[targets[t]->id];
        CandidateSample sample;
        sample.instance_id = targets[t]->id;
        sample.sample_index = bucket.size();
        sample.prediction = predict_example(model, target_inputs[t]);
        sample.provenance = {.source = SampleSource::kModel,
                             .model_index = m,
                             .checkpoint_step = step};
        bucket.push_back(std::move(sample));
      }
    };

    for (std::size_t u = 0; u <= updates; ++u) {
      while (next < steps.size() && steps[next] == u) {
        record(u);
        ++next;
      }
      if (u == updates || next == steps.size()) break;
      if (cursor + config.batch_size > order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const std::size_t end = std::min(order.size(), cursor + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + cursor,
                                               end - cursor);
      cursor = end;
      const GradientResult g =
          grad(model, objective, batch, ExecutionPolicy::kParallel);
      if (!std::isfinite(g.loss)) {
        throw TrainingError("model-based sampler diverged", u);
      }
      const double lr =
          config.schedule == LrSchedule::kCyclic
              ? cyclic_lr(u, config.learning_rate, config.max_learning_rate,
                          config.cycle_length)
              : config.learning_rate;
      sgd.step(model.params(), g.grad, lr);
    }
  }
  return out;
}

std::vector<CandidateSample> build_loss_dataset(
    std::vector<CandidateSample> samples, const DecisionProblem& problem,
    std::span<const PtoInstance* const> instances,
    const LossDatasetOptions& options) {
  std::map<std::uint64_t, const PtoInstance*> by_id;
  for (const auto* inst : instances) by_id[inst->id] = inst;
  std::map<std::uint64_t, std::size_t> next_index;
  for (const auto& s : samples) {
    if (s.has_regret()) {
      throw InputError("build_loss_dataset: sample already has a regret");
    }
    if (!by_id.contains(s.instance_id)) {
      throw InputError("build_loss_dataset: unknown instance " +
                       std::to_string(s.instance_id));
    }
    auto& n = next_index[s.instance_id];
    n = std::max(n, s.sample_index + 1);
  }

  // DQ(y, y) once per instance.
  std::vector<const PtoInstance*> ordered;
  for (const auto& [id, inst] : by_id) ordered.push_back(inst);
  std::vector<double> optimal(ordered.size());
  try {
    kernels::parallel_for(ordered.size(), options.policy, [&](std::size_t i) {
      optimal[i] =
          decision_quality(problem, ordered[i]->labels, ordered[i]->labels);
    });
  } catch (const SolverError& e) {
    for (const auto* inst : ordered) {
      try {
        decision_quality(problem, inst->labels, inst->labels);
      } catch (const SolverError&) {
        throw SolverError(std::string(e.what()) + " [instance " +
                              std::to_string(inst->id) + ", true labels]",
                          e.iterations(), e.gap(), e.best_iterate());
      }
    }
    throw;
  }
  std::map<std::uint64_t, double> optimal_by_id;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    optimal_by_id[ordered[i]->id] = optimal[i];
  }

  const std::size_t n = samples.size();
  std::vector<const Vector*> preds(n);
  std::vector<const Vector*> labels(n);
  std::vector<double> opt(n);
  std::vector<double> regrets(n);
  std::vector<double> seconds(n);
  for (std::size_t i = 0; i < n; ++i) {
    preds[i] = &samples[i].prediction;
    labels[i] = &by_id.at(samples[i].instance_id)->labels;
    opt[i] = optimal_by_id.at(samples[i].instance_id);
  }
  try {
    kernels::evaluate_regrets(problem, preds, labels, opt, regrets, seconds,
                              options.policy);
  } catch (const SolverError& e) {
    // Attach the failing sample's identity.
    for (std::size_t i = 0; i < n; ++i) {
      try {
        decision_quality(problem, samples[i].prediction, *labels[i]);
      } catch (const SolverError&) {
        throw SolverError(std::string(e.what()) + " [instance " +
                              std::to_string(samples[i].instance_id) +
                              ", sample " +
                              std::to_string(samples[i].sample_index) + "]",
                          e.iterations(), e.gap(), e.best_iterate());
      }
    }
    throw;
  }
  for (std::size_t i = 0; i < n; ++i) {
    samples[i].regret = regrets[i];
    samples[i].solve_seconds = seconds[i];
  }

  if (options.add_anchor) {
    for (const auto* inst : ordered) {
      CandidateSample anchor;
      anchor.instance_id = inst->id;
      anchor.sample_index = next_index[inst->id];
      anchor.prediction = inst->labels;
      anchor.regret = 0.0;
      anchor.provenance = {.source = SampleSource::kAnchor};
      samples.push_back(std::move(anchor));
    }
  }
  std::sort(samples.begin(), samples.end(),
            [](const CandidateSample& a, const CandidateSample& b) {
              return std::tie(a.instance_id, a.sample_index) <
                     std::tie(b.instance_id, b.sample_index);
            });
  return samples;
}

SampleMap group_by_instance(std::vector<CandidateSample> samples) {
  SampleMap out;
  for (auto& s : samples) out[s.instance_id].push_back(std::move(s));
  return out;
}

}  // namespace egl
