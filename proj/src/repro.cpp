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

// Desk-scale presets and the named reproduction bundles with their
// acceptance checks.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "egl/counterexample.hpp"
#include "egl/errors.hpp"
#include "egl/harness.hpp"

namespace egl {
namespace {

constexpr std::size_t kDeskInstances = 150;  // 100 / 20 / 30
constexpr std::size_t kDefaultTrials = 10;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Check check(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

std::vector<MethodSpec> rows(Method method, std::vector<LossFamily> families,
                             std::size_t samples = 32) {
  std::vector<MethodSpec> out;
  for (auto f : families) out.push_back({method, f, samples});
  return out;
}

void append(std::vector<MethodSpec>& to, std::vector<MethodSpec> more) {
  to.insert(to.end(), more.begin(), more.end());
}

const std::vector<LossFamily> kAllFamilies = {
    LossFamily::kWeightedMse, LossFamily::kDirectedWeightedMse,
    LossFamily::kQuadratic, LossFamily::kDirectedQuadratic};
const std::vector<LossFamily> kDirectedFamilies = {
    LossFamily::kDirectedWeightedMse, LossFamily::kDirectedQuadratic};

ReproResult table1(const std::string& name, Domain domain,
                   const ReproOptions& options) {
  ExperimentConfig c =
      desk_config(domain, options.trials.value_or(kDefaultTrials), options.seed);
  c.name = name;
  const bool cubic = domain == Domain::kCubic || domain == Domain::kCubicHard;
  c.methods = {{Method::kTwoStageMse}};
  append(c.methods, rows(Method::kLodl, cubic ? kAllFamilies : kDirectedFamilies));
  append(c.methods, rows(Method::kEglFull, kDirectedFamilies));

  ReproResult r;
  r.name = name;
  r.reports.push_back(run_experiment(c));
  const ExperimentReport& rep = r.reports.back();
  const MethodReport& egl = rep.best_by_validation(Method::kEglFull);
  const std::string egl_detail = egl.spec.label() + " test " +
                                 num(egl.test().mean) + " +- " +
                                 num(egl.test().sem);
  if (domain == Domain::kCubic) {
    const Summary mse = rep.find({Method::kTwoStageMse}).test();
    r.checks.push_back(check("two_stage_mse mean test ndq < 0", mse.mean < 0.0,
                             num(mse.mean) + " +- " + num(mse.sem)));
    r.checks.push_back(check("egl_full best-of-directed mean test ndq >= 0.7",
                             egl.test().mean >= 0.7, egl_detail));
  } else if (domain == Domain::kCubicHard) {
    for (const auto& m : rep.methods) {
      if (m.spec.method != Method::kLodl) continue;
      r.checks.push_back(check(m.spec.label() + " mean test ndq <= 0",
                               m.test().n > 0 && m.test().mean <= 0.0,
                               num(m.test().mean) + " +- " + num(m.test().sem)));
    }
    r.checks.push_back(check("egl_full best-of-directed mean test ndq >= 0.5",
                             egl.test().mean >= 0.5, egl_detail));
  } else {
    // Portfolio data drifts over time, so it is compared on validation.
    const bool on_test = domain == Domain::kWebAdv;
    const MethodReport& lodl = rep.best_by_validation(Method::kLodl);
    const Summary e = on_test ? egl.test() : egl.validation();
    const Summary l = on_test ? lodl.test() : lodl.validation();
    const std::string split = on_test ? "test" : "validation";
    r.checks.push_back(check(
        "egl_full mean " + split + " ndq >= lodl - 1 SEM", e.mean >= l.mean - l.sem,
        egl.spec.label() + " " + num(e.mean) + " vs " + lodl.spec.label() + " " +
            num(l.mean) + " - " + num(l.sem)));
  }
  r.checks.push_back(check("fewer than half the trials aborted", !rep.failed(), ""));
  return r;
}

ReproResult table2(const ReproOptions& options) {
  ExperimentConfig c = desk_config(
      Domain::kCubic, options.trials.value_or(kDefaultTrials), options.seed);
  c.name = "table2_ablation";
  c.methods.clear();
  for (auto m : {Method::kLodl, Method::kEglMbs, Method::kEglFbp,
                 Method::kEglFull}) {
    c.methods.push_back({m, LossFamily::kDirectedWeightedMse, 32});
  }
  ReproResult r;
  r.name = c.name;
  r.reports.push_back(run_experiment(c));
  const auto& rep = r.reports.back();
  const double full =
      rep.find({Method::kEglFull, LossFamily::kDirectedWeightedMse, 32}).test().mean;
  const double lodl =
      rep.find({Method::kLodl, LossFamily::kDirectedWeightedMse, 32}).test().mean;
  r.checks.push_back(check("egl_full exceeds lodl(32) by more than 0.5",
                           full - lodl > 0.5,
                           num(full) + " vs " + num(lodl)));
  r.checks.push_back(check("fewer than half the trials aborted", !rep.failed(), ""));
  return r;
}

ReproResult table4(const ReproOptions& options) {
  ReproResult r;
  r.name = "table4_mse";
  r.extra = Json::object();
  for (auto d : {Domain::kCubic, Domain::kCubicHard, Domain::kWebAdv,
                 Domain::kPortfolio}) {
    ExperimentConfig c =
        desk_config(d, options.trials.value_or(kDefaultTrials), options.seed);
    c.name = "table4_mse/" + std::string(to_string(d));
    c.methods = {{Method::kTwoStageMse}};
    r.reports.push_back(run_experiment(c));
    r.extra[std::string(to_string(d))] =
        r.reports.back().methods.front().validation_mse().mean;
  }
  const double cubic_min = std::min(r.extra["cubic"].get<double>(),
                                    r.extra["cubic_hard"].get<double>());
  const double other_max = std::max(r.extra["webadv"].get<double>(),
                                    r.extra["portfolio"].get<double>());
  r.checks.push_back(check("cubic validation mse exceeds web-adv and portfolio",
                           cubic_min > other_max,
                           num(cubic_min) + " > " + num(other_max)));
  return r;
}

ReproResult step_cost(const ReproOptions& options) {
  ReproResult r;
  r.name = "step_cost";
  r.extra = Json::object();
  for (auto d : {Domain::kWebAdv, Domain::kCubic}) {
    ExperimentConfig c = desk_config(d, options.trials.value_or(3), options.seed);
    c.name = "step_cost/" + std::string(to_string(d));
    c.methods = {{Method::kLodl, LossFamily::kWeightedMse, 32},
                 {Method::kLodl, LossFamily::kWeightedMse, 2048}};
    // Step timings should not compete with other trials for the core.
    c.trial_policy = ExecutionPolicy::kSerial;
    c.lodl.steps = 50;
    c.model_train.epochs = 5;
    r.reports.push_back(run_experiment(c));
    const auto& rep = r.reports.back();
    const double small = rep.methods[0].mean_times().dataset;
    const double large = rep.methods[1].mean_times().dataset;
    const double ratio = small > 0.0 ? large / small : 0.0;
    r.extra[std::string(to_string(d))] = {
        {"step2_seconds_32", small}, {"step2_seconds_2048", large},
        {"ratio", ratio}};
    if (d == Domain::kWebAdv) {
      r.checks.push_back(check("web-adv step-2 time ratio 2048/32 in [8, 128]",
                               ratio >= 8.0 && ratio <= 128.0, num(ratio)));
    }
  }
  return r;
}

ReproResult counterexample(const ReproOptions& options) {
  ReproResult r;
  r.name = "counterexample";
  CounterexampleConfig config;
  config.seed = options.seed;
  const CounterexampleReport closed = run_counterexample(config);
  config.fit = WeightFit::kGradientDescent;
  const CounterexampleReport gd = run_counterexample(config);

  Json table = Json::array();
  bool values_ok = true;
  for (std::size_t i = 0; i < closed.blue.size(); ++i) {
    const auto& b = closed.blue[i];
    const auto& o = closed.orange[i];
    table.push_back({{"blue_prediction_a", b.prediction_a},
                     {"blue_regret", b.regret},
                     {"orange_prediction_a", o.prediction_a},
                     {"orange_regret", o.regret}});
    const double want_b = b.prediction_a > kCounterexampleB ? 0.55 : 0.0;
    const double want_o = o.prediction_a < kCounterexampleB ? 0.45 : 0.0;
    values_ok = values_ok && std::abs(b.regret - want_b) < 1e-12 &&
                std::abs(o.regret - want_o) < 1e-12;
  }
  const auto outcome_json = [](const CounterexampleOutcome& o) {
    return Json{{"weight_blue", o.weight_blue},
                {"weight_orange", o.weight_orange},
                {"prediction_a", o.prediction_a},
                {"chosen", o.chosen == Individual::kA ? "A" : "B"},
                {"consistent", o.consistent}};
  };
  r.extra = {{"regret_table", table},
             {"closed_form", outcome_json(closed.fitted)},
             {"gradient_descent", outcome_json(gd.fitted)},
             {"reported_weights", outcome_json(closed.reported)}};
  r.checks.push_back(check("regret table takes values in {0, 0.45, 0.55}",
                           values_ok && closed.blue.size() == 15, ""));
  r.checks.push_back(check(
      "reported weights give prediction 0.602 +- 0.001 and choose A",
      std::abs(closed.reported.prediction_a - 0.602) <= 1e-3 &&
          closed.reported.chosen == Individual::kA,
      num(closed.reported.prediction_a)));
  r.checks.push_back(check(
      "gradient-descent weights match closed form within 1e-3",
      std::abs(gd.fitted.weight_blue - closed.closed_form_blue) < 1e-3 &&
          std::abs(gd.fitted.weight_orange - closed.closed_form_orange) < 1e-3,
      num(gd.fitted.weight_blue) + ", " + num(gd.fitted.weight_orange)));
  return r;
}

}  // namespace

ExperimentConfig desk_config(Domain domain, std::size_t trials,
                             std::uint64_t seed) {
  ExperimentConfig c;
  c.name = std::string(to_string(domain));
  c.dataset = default_spec(domain, kDeskInstances, seed);
  c.dataset.fractions = {100.0 / 150.0, 20.0 / 150.0, 30.0 / 150.0};
  c.num_trials = trials;
  c.seed = seed;

  c.gaussian.kind = SamplerKind::kGaussian;
  c.model_sampler.kind = SamplerKind::kModelBased;
  c.model_sampler.num_models = 5;
  c.model_sampler.learning_rate = 0.1;

  c.lodl.steps = 300;
  c.lodl.learning_rate = 0.05;

  c.fbp.hidden = 64;
  c.fbp.pairwise_hidden = 32;
  c.fbp.layers = 4;
  c.fbp_train.learning_rate = 1e-3;
  c.fbp_train.batch_size = 8;
  c.fbp_train.epochs = 60;
  c.fbp_train.patience = 8;

  c.model_train.learning_rate = 1e-2;
  c.model_train.batch_size = 8;
  c.model_train.epochs = 200;
  c.model_train.patience = 20;

  switch (domain) {
    case Domain::kCubic:
    case Domain::kCubicHard:
      c.gaussian.sigma = 1.0;
      // Few short runs from many He inits keep both slope signs in the
      // sample set; long runs collapse onto the MSE line.
      c.model_sampler.num_models = 16;
      c.model_sampler.update_budget = 100;
      c.model_train.learning_rate = 0.05;
      break;
    case Domain::kWebAdv:
      c.model_hidden = {32};
      c.gaussian.sigma = 0.1;
      c.model_sampler.update_budget = 5000;
      break;
    case Domain::kPortfolio:
      // A hidden layer lowers two-stage validation DQ at 100 train instances.
      c.gaussian.sigma = 0.01;
      c.model_sampler.learning_rate = 0.01;
      c.model_sampler.update_budget = 5000;
      break;
  }
  c.methods = {{Method::kTwoStageMse}};
  return c;
}

std::vector<std::string> repro_names() {
  return {"table1_cubic",    "table1_hard", "table1_webadv",
          "table1_portfolio", "table2_ablation", "table4_mse",
          "step_cost",        "counterexample"};
}

ReproResult run_repro(const std::string& name, const ReproOptions& options) {
  if (name == "table1_cubic") return table1(name, Domain::kCubic, options);
  if (name == "table1_hard") return table1(name, Domain::kCubicHard, options);
  if (name == "table1_webadv") return table1(name, Domain::kWebAdv, options);
  if (name == "table1_portfolio") {
    return table1(name, Domain::kPortfolio, options);
  }
  if (name == "table2_ablation") return table2(options);
  if (name == "table4_mse") return table4(options);
  if (name == "step_cost") return step_cost(options);
  if (name == "counterexample") return counterexample(options);
  throw ConfigError("unknown reproduction '" + name + "'");
}

}  // namespace egl
