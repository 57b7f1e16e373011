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

#include "egl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <tuple>

#include "egl/counterexample.hpp"
#include "egl/errors.hpp"
#include "egl/kernels.hpp"

namespace egl {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Seed streams derived from a trial seed.
enum Stream : std::uint64_t {
  kDataStream = 1,
  kSplitStream = 2,
  kModelSamplerStream = 3,
  kGaussianStream = 4,
  kModelInitStream = 5,
  kModelShuffleStream = 6,
  kBaselineStream = 7,
  kFbpStream = 8,
};

std::vector<const PtoInstance*> concat(std::span<const PtoInstance* const> a,
                                       std::span<const PtoInstance* const> b) {
  std::vector<const PtoInstance*> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<std::size_t> iota_index(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

MseObjective mse_objective(std::span<const PtoInstance* const> instances) {
  std::vector<Matrix> inputs;
  std::vector<Vector> targets;
  for (const auto* inst : instances) {
    inputs.push_back(feature_matrix(*inst));
    targets.push_back(inst->labels);
  }
  return MseObjective(std::move(inputs), std::move(targets));
}

struct SampleSet {
  SampleMap samples;  // with regrets and anchors
  double sampling = 0.0;
  double dataset = 0.0;
};

// Per-instance quantities shared by every method of a trial.
struct InstanceScore {
  double optimal = 0.0;
  double baseline = 0.0;
};

class TrialRunner {
 public:
  TrialRunner(const ExperimentConfig& config, std::uint64_t seed)
      : config_(config), seed_(seed) {
    DatasetSpec spec = config.dataset;
    spec.seed = mix_seed(seed, kDataStream);
    dataset_ = split_dataset(generate(spec), spec.fractions,
                             default_split_mode(spec.domain),
                             mix_seed(seed, kSplitStream));
    problem_ = make_problem(dataset_);
    train_ = dataset_.split(Split::kTrain);
    validation_ = dataset_.split(Split::kValidation);
    test_ = dataset_.split(Split::kTest);
    if (train_.empty() || validation_.empty() || test_.empty()) {
      throw ConfigError("experiment: every split needs at least one instance");
    }
    for (const auto* inst : concat(validation_, test_)) {
      InstanceScore s;
      s.optimal = decision_quality(*problem_, inst->labels, inst->labels);
      s.baseline =
          baseline_dq(*problem_, inst->labels,
                      mix_seed(mix_seed(seed, kBaselineStream), inst->id),
                      config.baseline_draws);
      scores_[inst->id] = s;
    }
  }

  TrialResult run(const MethodSpec& spec) {
    TrialResult result;
    result.seed = seed_;
    try {
      run_method(spec, result);
    } catch (const std::exception& e) {
      result = TrialResult{};
      result.seed = seed_;
      result.aborted = true;
      result.error = e.what();
    }
    return result;
  }

 private:
  Mlp fresh_model() const {
    return make_predictive_model(*train_.front(), config_.model_hidden,
                                 mix_seed(seed_, kModelInitStream));
  }

  TrainConfig step4_config() const {
    TrainConfig c = config_.model_train;
    c.seed = mix_seed(seed_, kModelShuffleStream);
    return c;
  }

  double mean_validation_regret(const Mlp& model) const {
    std::vector<double> regrets(validation_.size());
    kernels::parallel_for(
        validation_.size(), config_.model_train.policy, [&](std::size_t i) {
          const auto* inst = validation_[i];
          const Vector pred = predict_example(model, feature_matrix(*inst));
          regrets[i] =
              scores_.at(inst->id).optimal -
              decision_quality(*problem_, pred, inst->labels);
        });
    return std::accumulate(regrets.begin(), regrets.end(), 0.0) /
           static_cast<double>(regrets.size());
  }

  // Two-stage model, trained once per trial.
  const Mlp& mse_model(double* seconds) {
    if (!mse_model_) {
      const auto start = Clock::now();
      Mlp model = fresh_model();
      const MseObjective train_obj = mse_objective(train_);
      const MseObjective val_obj = mse_objective(validation_);
      const auto val_index = iota_index(validation_.size());
      const auto history = egl::train(
          model, train_obj, step4_config(), [&](const Mlp& m) {
            return kernels::mean_loss(m, val_obj, val_index,
                                      config_.model_train.policy);
          });
      mse_updates_ = history.updates;
      mse_model_ = std::make_unique<Mlp>(std::move(model));
      mse_seconds_ = seconds_since(start);
    }
    *seconds = mse_seconds_;
    return *mse_model_;
  }

  const SampleSet& samples_for(SamplerKind kind, std::size_t k) {
    const auto key = std::make_pair(kind, k);
    auto it = sample_cache_.find(key);
    if (it != sample_cache_.end()) return it->second;

    SampleSet set;
    const auto targets = concat(train_, validation_);
    std::vector<CandidateSample> flat;
    auto start = Clock::now();
    if (kind == SamplerKind::kGaussian) {
      const std::uint64_t stream = mix_seed(seed_, kGaussianStream);
      for (const auto* inst : targets) {
        auto s = gaussian_sample(*inst, config_.gaussian.sigma, k,
                                 mix_seed(stream, inst->id));
        flat.insert(flat.end(), std::make_move_iterator(s.begin()),
                    std::make_move_iterator(s.end()));
      }
    } else {
      SamplerConfig sc = config_.model_sampler;
      sc.kind = SamplerKind::kModelBased;
      sc.samples = k;
      sc.hidden = config_.model_hidden;
      sc.seed = mix_seed(seed_, kModelSamplerStream);
      SampleMap by_instance = model_based_sample(train_, targets, sc);
      for (auto& [id, samples] : by_instance) {
        flat.insert(flat.end(), std::make_move_iterator(samples.begin()),
                    std::make_move_iterator(samples.end()));
      }
    }
    set.sampling = seconds_since(start);

    start = Clock::now();
    LossDatasetOptions options;
    options.policy = config_.model_train.policy;
    set.samples = group_by_instance(
        build_loss_dataset(std::move(flat), *problem_, targets, options));
    set.dataset = seconds_since(start);
    return sample_cache_.emplace(key, std::move(set)).first->second;
  }

  void run_method(const MethodSpec& spec, TrialResult& result) {
    Mlp model;
    if (spec.method == Method::kTwoStageMse) {
      model = mse_model(&result.times.training);
      result.updates = mse_updates_;
    } else {
      const LearnedLosses losses = learned_losses(spec, result);
      const auto start = Clock::now();
      model = fresh_model();
      const LearnedLossObjective objective(train_, losses.train);
      const LearnedLossObjective val_objective(validation_, losses.validation);
      const auto val_index = iota_index(validation_.size());
      const auto history = egl::train(
          model, objective, step4_config(), [&](const Mlp& m) {
            if (config_.step4_stop == StopMetric::kRegret) {
              return mean_validation_regret(m);
            }
            return kernels::mean_loss(m, val_objective, val_index,
                                      config_.model_train.policy);
          });
      result.updates = history.updates;
      result.times.training = seconds_since(start);
    }
    score(model, result);
  }

  struct LearnedLosses {
    std::vector<LossParams> train;
    std::vector<LossParams> validation;
  };

  // Steps 1-3; one loss per training and per validation instance.
  LearnedLosses learned_losses(const MethodSpec& spec, TrialResult& result) {
    LearnedLosses out;
    const auto targets = concat(train_, validation_);
    const auto split_fits = [&](const std::vector<LossFit>& fits) {
      for (std::size_t i = 0; i < fits.size(); ++i) {
        (i < train_.size() ? out.train : out.validation).push_back(fits[i].params);
      }
    };
    if (spec.method == Method::kLzOneSample) {
      const Mlp& base = mse_model(&result.times.sampling);
      auto start = Clock::now();
      std::vector<CandidateSample> flat;
      for (const auto* inst : targets) {
        CandidateSample s;
        s.instance_id = inst->id;
        s.prediction = predict_example(base, feature_matrix(*inst));
        s.provenance = {.source = SampleSource::kModel};
        flat.push_back(std::move(s));
      }
      LossDatasetOptions options;
      options.policy = config_.model_train.policy;
      const SampleMap samples = group_by_instance(
          build_loss_dataset(std::move(flat), *problem_, targets, options));
      result.times.dataset = seconds_since(start);
      start = Clock::now();
      LossFitConfig fit = config_.lodl;
      fit.family = LossFamily::kLz;
      split_fits(fit_lodl_batch(samples, targets, fit,
                                config_.model_train.policy));
      result.times.fitting = seconds_since(start);
      return out;
    }

    const bool model_based =
        spec.method == Method::kEglMbs || spec.method == Method::kEglFull;
    const SampleSet& set = samples_for(
        model_based ? SamplerKind::kModelBased : SamplerKind::kGaussian,
        spec.samples);
    result.times.sampling = set.sampling;
    result.times.dataset = set.dataset;

    const auto start = Clock::now();
    if (spec.method == Method::kLodl || spec.method == Method::kEglMbs) {
      LossFitConfig fit = config_.lodl;
      fit.family = spec.family;
      split_fits(fit_lodl_batch(set.samples, targets, fit,
                                config_.model_train.policy));
    } else {
      FbpConfig fbp = config_.fbp;
      fbp.family = spec.family;
      fbp.seed = mix_seed(seed_, kFbpStream);
      TrainConfig tc = config_.fbp_train;
      tc.seed = mix_seed(seed_, kFbpStream + 1);
      const FbpFit fit = fit_fbp(set.samples, train_, validation_, fbp, tc);
      for (const auto* inst : train_) {
        out.train.push_back(induced_params(fit.network, *inst));
      }
      for (const auto* inst : validation_) {
        out.validation.push_back(induced_params(fit.network, *inst));
      }
    }
    result.times.fitting = seconds_since(start);
    return out;
  }

  void score(const Mlp& model, TrialResult& result) const {
    const auto ndq_mean = [&](std::span<const PtoInstance* const> instances,
                              std::size_t* skipped) {
      double sum = 0.0;
      std::size_t used = 0;
      for (const auto* inst : instances) {
        const Vector pred = predict_example(model, feature_matrix(*inst));
        const InstanceScore& s = scores_.at(inst->id);
        try {
          sum += normalize_dq(decision_quality(*problem_, pred, inst->labels),
                              s.optimal, s.baseline);
          ++used;
        } catch (const DegenerateBaselineError&) {
          ++*skipped;
        }
      }
      if (used == 0) {
        throw DegenerateBaselineError("every instance has a degenerate baseline");
      }
      return sum / static_cast<double>(used);
    };
    std::size_t skipped_val = 0;
    result.test_ndq = ndq_mean(test_, &result.degenerate_skipped);
    result.validation_ndq = ndq_mean(validation_, &skipped_val);
    const MseObjective val_obj = mse_objective(validation_);
    result.validation_mse =
        kernels::mean_loss(model, val_obj, iota_index(validation_.size()),
                           ExecutionPolicy::kSerial);
  }

  const ExperimentConfig& config_;
  std::uint64_t seed_;
  Dataset dataset_;
  std::shared_ptr<const DecisionProblem> problem_;
  std::vector<const PtoInstance*> train_;
  std::vector<const PtoInstance*> validation_;
  std::vector<const PtoInstance*> test_;
  std::map<std::uint64_t, InstanceScore> scores_;
  std::map<std::pair<SamplerKind, std::size_t>, SampleSet> sample_cache_;
  std::unique_ptr<Mlp> mse_model_;
  std::size_t mse_updates_ = 0;
  double mse_seconds_ = 0.0;
};

Json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"sem", s.sem}, {"n", s.n}};
}

Json times_json(const StepTimes& t) {
  return {{"sampling", t.sampling},
          {"dataset", t.dataset},
          {"fitting", t.fitting},
          {"training", t.training}};
}

StepTimes times_from_json(const Json& j) {
  StepTimes t;
  t.sampling = j.value("sampling", 0.0);
  t.dataset = j.value("dataset", 0.0);
  t.fitting = j.value("fitting", 0.0);
  t.training = j.value("training", 0.0);
  return t;
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kTwoStageMse:
      return "two_stage_mse";
    case Method::kLzOneSample:
      return "lz_one_sample";
    case Method::kLodl:
      return "lodl";
    case Method::kEglMbs:
      return "egl_mbs";
    case Method::kEglFbp:
      return "egl_fbp";
    case Method::kEglFull:
      return "egl_full";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  for (auto m : {Method::kTwoStageMse, Method::kLzOneSample, Method::kLodl,
                 Method::kEglMbs, Method::kEglFbp, Method::kEglFull}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

bool method_uses_family(Method method) {
  return method != Method::kTwoStageMse && method != Method::kLzOneSample;
}

std::string_view to_string(StopMetric metric) {
  return metric == StopMetric::kRegret ? "validation_regret" : "validation_loss";
}

StopMetric stop_metric_from_string(std::string_view name) {
  if (name == "validation_loss") return StopMetric::kLearnedLoss;
  if (name == "validation_regret") return StopMetric::kRegret;
  throw ConfigError("unknown step4_stop '" + std::string(name) + "'");
}

std::string MethodSpec::label() const {
  std::string out(to_string(method));
  if (method_uses_family(method)) {
    out += "/" + std::string(to_string(family)) + "/" + std::to_string(samples);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("experiment: no methods");
  if (num_trials == 0) throw ConfigError("experiment: num_trials must be >= 1");
  if (!seeds.empty() && seeds.size() != num_trials) {
    throw ConfigError("experiment: " + std::to_string(seeds.size()) +
                      " seeds for " + std::to_string(num_trials) + " trials");
  }
  if (baseline_draws == 0) {
    throw ConfigError("experiment: baseline_draws must be >= 1");
  }
  try {
    dataset.fractions.validate();
  } catch (const InputError& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  }
  for (const auto& m : methods) {
    if (!method_uses_family(m.method)) continue;
    if (m.samples == 0) throw ConfigError(m.label() + ": K must be >= 1");
    const bool fbp = m.method == Method::kEglFbp || m.method == Method::kEglFull;
    if (fbp) {
      try {
        fbp_heads(m.family);
      } catch (const CapabilityError& e) {
        throw ConfigError(m.label() + ": " + e.what());
      }
    }
    if (m.method == Method::kEglMbs || m.method == Method::kEglFull) {
      SamplerConfig sc = model_sampler;
      sc.kind = SamplerKind::kModelBased;
      sc.samples = m.samples;
      sc.validate();
    }
  }
  gaussian.validate();
  lodl.validate();
  fbp_train.validate();
  model_train.validate();
}

std::vector<std::uint64_t> ExperimentConfig::trial_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (std::size_t t = 0; t < num_trials; ++t) out.push_back(mix_seed(seed, t));
  return out;
}

Json to_json(const ExperimentConfig& c) {
  Json methods = Json::array();
  for (const auto& m : c.methods) {
    Json j = {{"method", to_string(m.method)}};
    if (method_uses_family(m.method)) {
      j["family"] = to_string(m.family);
      j["samples"] = m.samples;
    }
    methods.push_back(j);
  }
  return {{"name", c.name},
          {"dataset", to_json(c.dataset)},
          {"methods", methods},
          {"gaussian", to_json(c.gaussian)},
          {"model_sampler", to_json(c.model_sampler)},
          {"model_hidden", c.model_hidden},
          {"lodl", to_json(c.lodl)},
          {"fbp", to_json(c.fbp)},
          {"fbp_train", to_json(c.fbp_train)},
          {"model_train", to_json(c.model_train)},
          {"step4_stop", to_string(c.step4_stop)},
          {"num_trials", c.num_trials},
          {"seeds", c.seeds},
          {"seed", c.seed},
          {"baseline_draws", c.baseline_draws},
          {"trial_policy", to_string(c.trial_policy)}};
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  JsonFields f(j, "experiment");
  ExperimentConfig c;
  // Domain-specific presets first, then explicit overrides.
  if (j.contains("dataset") && j["dataset"].contains("domain")) {
    const DatasetSpec probe = dataset_spec_from_json(j["dataset"]);
    c = desk_config(probe.domain, c.num_trials, c.seed);
    c.methods.clear();
  }
  f.get("name", c.name);
  f.get_with("dataset", c.dataset,
             [](const Json& v) { return dataset_spec_from_json(v); });
  f.get_with("methods", c.methods, [](const Json& v) {
    std::vector<MethodSpec> out;
    for (const auto& e : v) {
      JsonFields g(e, "experiment.methods[]");
      MethodSpec m;
      g.get_with("method", m.method, [](const Json& s) {
        return method_from_string(s.get<std::string>());
      });
      g.get_with("family", m.family, [](const Json& s) {
        return loss_family_from_string(s.get<std::string>());
      });
      g.get("samples", m.samples);
      g.finish();
      out.push_back(m);
    }
    return out;
  });
  const auto merge = [](const Json& base, const Json& patch) {
    Json out = base;
    out.update(patch);
    return out;
  };
  f.get_with("gaussian", c.gaussian, [&](const Json& v) {
    return sampler_config_from_json(merge(to_json(c.gaussian), v));
  });
  f.get_with("model_sampler", c.model_sampler, [&](const Json& v) {
    return sampler_config_from_json(merge(to_json(c.model_sampler), v));
  });
  f.get("model_hidden", c.model_hidden);
  f.get_with("lodl", c.lodl, [&](const Json& v) {
    return loss_fit_config_from_json(merge(to_json(c.lodl), v));
  });
  f.get_with("fbp", c.fbp, [&](const Json& v) {
    return fbp_config_from_json(merge(to_json(c.fbp), v));
  });
  f.get_with("fbp_train", c.fbp_train, [&](const Json& v) {
    return train_config_from_json(merge(to_json(c.fbp_train), v));
  });
  f.get_with("model_train", c.model_train, [&](const Json& v) {
    return train_config_from_json(merge(to_json(c.model_train), v));
  });
  f.get_with("step4_stop", c.step4_stop, [](const Json& v) {
    return stop_metric_from_string(v.get<std::string>());
  });
  f.get("num_trials", c.num_trials);
  f.get("seeds", c.seeds);
  f.get("seed", c.seed);
  f.get("baseline_draws", c.baseline_draws);
  f.get_with("trial_policy", c.trial_policy, [](const Json& v) {
    return execution_policy_from_string(v.get<std::string>());
  });
  f.finish();
  c.validate();
  return c;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sem = std::sqrt(ss / static_cast<double>(s.n - 1)) /
          std::sqrt(static_cast<double>(s.n));
  return s;
}

std::vector<double> MethodReport::values(double TrialResult::*field) const {
  std::vector<double> out;
  for (const auto& t : trials) {
    if (!t.aborted) out.push_back(t.*field);
  }
  return out;
}

Summary MethodReport::test() const {
  return summarize(values(&TrialResult::test_ndq));
}

Summary MethodReport::validation() const {
  return summarize(values(&TrialResult::validation_ndq));
}

Summary MethodReport::validation_mse() const {
  return summarize(values(&TrialResult::validation_mse));
}

std::size_t MethodReport::aborted() const {
  return static_cast<std::size_t>(std::count_if(
      trials.begin(), trials.end(), [](const auto& t) { return t.aborted; }));
}

StepTimes MethodReport::mean_times() const {
  StepTimes out;
  std::size_t n = 0;
  for (const auto& t : trials) {
    if (t.aborted) continue;
    out.sampling += t.times.sampling;
    out.dataset += t.times.dataset;
    out.fitting += t.times.fitting;
    out.training += t.times.training;
    ++n;
  }
  if (n > 0) {
    const double inv = 1.0 / static_cast<double>(n);
    out.sampling *= inv;
    out.dataset *= inv;
    out.fitting *= inv;
    out.training *= inv;
  }
  return out;
}

bool ExperimentReport::failed() const {
  return std::any_of(methods.begin(), methods.end(), [](const auto& m) {
    return 2 * m.aborted() > m.trials.size();
  });
}

const MethodReport& ExperimentReport::find(const MethodSpec& spec) const {
  for (const auto& m : methods) {
    if (m.spec.label() == spec.label()) return m;
  }
  throw InputError("report has no row " + spec.label());
}

const MethodReport& ExperimentReport::best_by_validation(Method method) const {
  const MethodReport* best = nullptr;
  for (const auto& m : methods) {
    if (m.spec.method != method || m.validation().n == 0) continue;
    if (best == nullptr || m.validation().mean > best->validation().mean) {
      best = &m;
    }
  }
  if (best == nullptr) {
    throw InputError("report has no completed " + std::string(to_string(method)) +
                     " row");
  }
  return *best;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto seeds = config.trial_seeds();
  std::vector<std::vector<TrialResult>> per_trial(seeds.size());
  kernels::parallel_for(seeds.size(), config.trial_policy, [&](std::size_t t) {
    auto& out = per_trial[t];
    try {
      TrialRunner runner(config, seeds[t]);
      for (const auto& m : config.methods) out.push_back(runner.run(m));
    } catch (const std::exception& e) {
      out.clear();
      for (std::size_t m = 0; m < config.methods.size(); ++m) {
        TrialResult r;
        r.seed = seeds[t];
        r.aborted = true;
        r.error = e.what();
        out.push_back(r);
      }
    }
  });
  ExperimentReport report;
  report.name = config.name;
  report.config = to_json(config);
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    MethodReport row;
    row.spec = config.methods[m];
    for (const auto& trial : per_trial) row.trials.push_back(trial[m]);
    report.methods.push_back(std::move(row));
  }
  return report;
}

Json to_json(const ExperimentReport& report, bool include_timings) {
  Json methods = Json::array();
  for (const auto& m : report.methods) {
    Json trials = Json::array();
    for (const auto& t : m.trials) {
      Json j = {{"seed", t.seed},
                {"aborted", t.aborted},
                {"error", t.error},
                {"test_ndq", t.test_ndq},
                {"validation_ndq", t.validation_ndq},
                {"validation_mse", t.validation_mse},
                {"degenerate_skipped", t.degenerate_skipped},
                {"updates", t.updates}};
      if (include_timings) j["times"] = times_json(t.times);
      trials.push_back(j);
    }
    Json row = {{"label", m.spec.label()},
                {"method", to_string(m.spec.method)},
                {"family", to_string(m.spec.family)},
                {"samples", m.spec.samples},
                {"test", summary_json(m.test())},
                {"validation", summary_json(m.validation())},
                {"validation_mse", summary_json(m.validation_mse())},
                {"aborted", m.aborted()},
                {"trials", trials}};
    if (include_timings) row["mean_times"] = times_json(m.mean_times());
    methods.push_back(row);
  }
  return {{"name", report.name},
          {"failed", report.failed()},
          {"config", report.config},
          {"methods", methods}};
}

ExperimentReport experiment_report_from_json(const Json& j) {
  ExperimentReport report;
  try {
    report.name = j.value("name", "");
    report.config = j.value("config", Json::object());
    for (const auto& row : j.at("methods")) {
      MethodReport m;
      m.spec.method = method_from_string(row.at("method").get<std::string>());
      m.spec.family =
          loss_family_from_string(row.value("family", std::string("wmse")));
      m.spec.samples = row.value("samples", std::size_t{32});
      for (const auto& t : row.at("trials")) {
        TrialResult r;
        r.seed = t.value("seed", std::uint64_t{0});
        r.aborted = t.value("aborted", false);
        r.error = t.value("error", "");
        r.test_ndq = t.value("test_ndq", 0.0);
        r.validation_ndq = t.value("validation_ndq", 0.0);
        r.validation_mse = t.value("validation_mse", 0.0);
        r.degenerate_skipped = t.value("degenerate_skipped", std::size_t{0});
        r.updates = t.value("updates", std::size_t{0});
        if (t.contains("times")) r.times = times_from_json(t["times"]);
        m.trials.push_back(r);
      }
      report.methods.push_back(std::move(m));
    }
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
  return report;
}

std::string format_table(const ExperimentReport& report) {
  std::ostringstream out;
  out << report.name << '\n';
  out << pad("method", 28) << pad("test ndq", 20) << pad("val ndq", 20)
      << pad("val mse", 14) << "aborted\n";
  for (const auto& m : report.methods) {
    const Summary t = m.test();
    const Summary v = m.validation();
    out << pad(m.spec.label(), 28)
        << pad(fixed(t.mean) + " +- " + fixed(t.sem), 20)
        << pad(fixed(v.mean) + " +- " + fixed(v.sem), 20)
        << pad(fixed(m.validation_mse().mean, 6), 14) << m.aborted() << '/'
        << m.trials.size() << '\n';
  }
  return out.str();
}

std::string format_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "method,family,samples,seed,aborted,test_ndq,validation_ndq,"
         "validation_mse,sampling_s,dataset_s,fitting_s,training_s\n";
  char buf[512];
  for (const auto& m : report.methods) {
    for (const auto& t : m.trials) {
      std::snprintf(buf, sizeof buf,
                    "%s,%s,%zu,%llu,%d,%.17g,%.17g,%.17g,%.6f,%.6f,%.6f,%.6f\n",
                    std::string(to_string(m.spec.method)).c_str(),
                    method_uses_family(m.spec.method)
                        ? std::string(to_string(m.spec.family)).c_str()
                        : "",
                    m.spec.samples, static_cast<unsigned long long>(t.seed),
                    t.aborted ? 1 : 0, t.test_ndq, t.validation_ndq,
                    t.validation_mse, t.times.sampling, t.times.dataset,
                    t.times.fitting, t.times.training);
      out << buf;
    }
  }
  return out.str();
}

std::string step_timing_summary(const ExperimentReport& report) {
  std::ostringstream out;
  out << pad("method", 28) << pad("step1 s", 12) << pad("step2 s", 12)
      << pad("step3 s", 12) << pad("step4 s", 12) << pad("total s", 12)
      << "step2 share\n";
  for (const auto& m : report.methods) {
    const StepTimes t = m.mean_times();
    const double steps123 = t.sampling + t.dataset + t.fitting;
    out << pad(m.spec.label(), 28) << pad(fixed(t.sampling, 4), 12)
        << pad(fixed(t.dataset, 4), 12) << pad(fixed(t.fitting, 4), 12)
        << pad(fixed(t.training, 4), 12) << pad(fixed(t.total(), 4), 12)
        << fixed(steps123 > 0.0 ? t.dataset / steps123 : 0.0, 3) << '\n';
  }
  return out.str();
}

bool ReproResult::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const Check& c) { return c.passed; });
}

std::string format_checks(const ReproResult& result) {
  std::ostringstream out;
  for (const auto& c : result.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << result.name << ": " << c.name;
    if (!c.detail.empty()) out << " (" << c.detail << ")";
    out << '\n';
  }
  return out.str();
}

void write_repro(const ReproResult& result, const fs::path& out) {
  fs::create_directories(out);
  Json reports = Json::array();
  std::string text;
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    reports.push_back(to_json(result.reports[i]));
    text += format_table(result.reports[i]) + '\n';
    text += step_timing_summary(result.reports[i]) + '\n';
    std::ofstream csv(out / (result.name + "." + std::to_string(i) + ".csv"));
    csv << format_csv(result.reports[i]);
  }
  Json checks = Json::array();
  for (const auto& c : result.checks) {
    checks.push_back(
        {{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  write_json(out / (result.name + ".json"), {{"name", result.name},
                                             {"passed", result.passed()},
                                             {"checks", checks},
                                             {"extra", result.extra},
                                             {"reports", reports}});
  std::ofstream txt(out / (result.name + ".txt"));
  txt << text;
  if (!result.extra.is_null()) txt << result.extra.dump(2) << "\n\n";
  txt << format_checks(result);
}

}  // namespace egl
