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

// egl-lab: command-line front end for the learned-loss workbench.
//
// Exit codes: 0 success, 1 other failure, 2 configuration or input error,
// 3 solver error, 4 a reproduction missed an acceptance threshold.

#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "egl/core.hpp"
#include "egl/datagen.hpp"
#include "egl/errors.hpp"
#include "egl/harness.hpp"
#include "egl/kernels.hpp"
#include "egl/losses.hpp"
#include "egl/sampling.hpp"
#include "egl/serialization.hpp"
#include "egl/tensor_nn.hpp"

namespace fs = std::filesystem;
using namespace egl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitAcceptance = 4;

std::vector<const PtoInstance*> all_instances(const Dataset& ds) {
  std::vector<const PtoInstance*> out;
  for (const auto& inst : ds.instances) out.push_back(&inst);
  return out;
}

int cmd_generate(const std::string& domain, std::size_t instances,
                 std::uint64_t seed, const std::string& out,
                 const std::string& name, const std::string& config) {
  DatasetSpec spec = config.empty()
                         ? default_spec(domain_from_string(domain), instances,
                                        seed)
                         : dataset_spec_from_json(read_json(config));
  if (config.empty()) spec.seed = seed;
  Dataset ds = split_dataset(generate(spec), spec.fractions,
                             default_split_mode(spec.domain),
                             mix_seed(spec.seed, 2));
  const std::string stem = name.empty() ? std::string(to_string(spec.domain)) : name;
  save_dataset(ds, out, stem);
  std::cout << "wrote " << (fs::path(out) / (stem + ".meta")).string() << " ("
            << ds.instances.size() << " instances)\n";
  return kExitOk;
}

int cmd_sample(const std::string& data, const std::string& sampler_name,
               std::size_t k, double sigma, std::uint64_t seed,
               const std::string& config, const std::string& out) {
  const Dataset ds = load_dataset(data);
  const auto problem = make_problem(ds);
  SamplerConfig sc = config.empty() ? SamplerConfig{}
                                    : sampler_config_from_json(read_json(config));
  if (config.empty()) {
    sc.kind = sampler_kind_from_string(sampler_name);
    sc.samples = k;
    sc.sigma = sigma;
    sc.seed = seed;
  }
  sc.validate();
  const auto targets = all_instances(ds);
  std::vector<CandidateSample> flat;
  if (sc.kind == SamplerKind::kGaussian) {
    for (const auto* inst : targets) {
      auto s = gaussian_sample(*inst, sc.sigma, sc.samples,
                               mix_seed(sc.seed, inst->id));
      flat.insert(flat.end(), s.begin(), s.end());
    }
  } else {
    const auto train = ds.split(Split::kTrain);
    for (auto& [id, s] : model_based_sample(train, targets, sc)) {
      flat.insert(flat.end(), s.begin(), s.end());
    }
  }
  const auto samples = build_loss_dataset(std::move(flat), *problem, targets);
  save_loss_dataset(out, samples, sc, problem->metadata());
  std::cout << "wrote " << samples.size() << " samples to " << out << '\n';
  return kExitOk;
}

int cmd_fit_loss(const std::string& data, const std::string& samples_path,
                 const std::string& family, const std::string& mode,
                 std::size_t hidden, std::uint64_t seed,
                 const std::string& out) {
  const Dataset ds = load_dataset(data);
  const SampleMap samples = group_by_instance(load_loss_dataset(samples_path));
  const LossFamily fam = loss_family_from_string(family);
  if (mode == "lodl") {
    std::vector<const PtoInstance*> fitted;
    for (const auto& inst : ds.instances) {
      if (samples.contains(inst.id)) fitted.push_back(&inst);
    }
    LossFitConfig fc;
    fc.family = fam;
    const auto fits = fit_lodl_batch(samples, fitted, fc);
    std::vector<std::uint64_t> ids;
    std::vector<LossParams> params;
    double mse = 0.0;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      ids.push_back(fitted[i]->id);
      params.push_back(fits[i].params);
      mse += fits[i].fit_mse / static_cast<double>(fits.size());
    }
    save_fitted_losses(out, ids, params);
    std::cout << "fitted " << fits.size() << " losses, mean fit mse " << mse
              << '\n';
  } else if (mode == "fbp") {
    FbpConfig fc;
    fc.family = fam;
    fc.hidden = hidden;
    fc.seed = seed;
    TrainConfig tc;
    tc.seed = mix_seed(seed, 1);
    tc.epochs = 60;
    tc.patience = 8;
    const FbpFit fit = fit_fbp(samples, ds.split(Split::kTrain),
                               ds.split(Split::kValidation), fc, tc);
    save_fbp_network(out, fit.network);
    std::cout << "fbp fit mse train " << fit.train_fit_mse << ", validation "
              << fit.validation_fit_mse << '\n';
  } else {
    throw ConfigError("--mode must be lodl or fbp");
  }
  return kExitOk;
}

std::vector<LossParams> losses_for(const std::string& path,
                                   std::span<const PtoInstance* const> train) {
  std::vector<LossParams> out;
  if (fitted_loss_kind(path) == "fbp") {
    const FbpNetwork net = load_fbp_network(path);
    for (const auto* inst : train) out.push_back(induced_params(net, *inst));
    return out;
  }
  std::map<std::uint64_t, LossParams> by_id;
  for (auto& [id, p] : load_fitted_losses(path)) by_id.emplace(id, p);
  for (const auto* inst : train) {
    const auto it = by_id.find(inst->id);
    if (it == by_id.end()) {
      throw InputError("no fitted loss for training instance " +
                       std::to_string(inst->id));
    }
    out.push_back(it->second);
  }
  return out;
}

int cmd_train(const std::string& data, const std::string& loss,
              const std::vector<std::size_t>& hidden, std::size_t epochs,
              double lr, std::uint64_t seed, const std::string& out) {
  const Dataset ds = load_dataset(data);
  const auto problem = make_problem(ds);
  const auto train = ds.split(Split::kTrain);
  const auto val = ds.split(Split::kValidation);
  if (train.empty()) throw InputError("dataset has no training split");
  Mlp model = make_predictive_model(*train.front(), hidden, seed);
  TrainConfig tc;
  tc.epochs = epochs;
  tc.learning_rate = lr;
  tc.seed = mix_seed(seed, 1);
  TrainHistory history;
  const auto regret_fn = [&](const Mlp& m) {
    double sum = 0.0;
    for (const auto* inst : val) {
      sum += dq_regret(*problem, predict_example(m, feature_matrix(*inst)),
                       inst->labels);
    }
    return sum / static_cast<double>(val.size());
  };
  if (loss.empty()) {
    std::vector<Matrix> in;
    std::vector<Vector> y;
    for (const auto* inst : train) {
      in.push_back(feature_matrix(*inst));
      y.push_back(inst->labels);
    }
    history = egl::train(model, MseObjective(in, y), tc,
                         val.empty() ? ValidationFn{} : ValidationFn(regret_fn));
  } else {
    const LearnedLossObjective objective(train, losses_for(loss, train));
    history = egl::train(model, objective, tc,
                         val.empty() ? ValidationFn{} : ValidationFn(regret_fn));
  }
  save_checkpoint(model, out);
  std::cout << "trained " << history.updates << " updates, final train loss "
            << history.train_loss.back() << "; wrote " << out << '\n';
  return kExitOk;
}

int cmd_evaluate(const std::string& data, const std::string& model_path,
                 const std::string& split, std::uint64_t seed,
                 std::size_t draws) {
  const Dataset ds = load_dataset(data);
  const auto problem = make_problem(ds);
  const Mlp model = load_checkpoint(model_path);
  const auto instances = ds.split(split_from_string(split));
  if (instances.empty()) throw InputError("split '" + split + "' is empty");
  std::vector<double> values;
  std::size_t skipped = 0;
  for (const auto* inst : instances) {
    try {
      values.push_back(normalized_dq(
          *problem, predict_example(model, feature_matrix(*inst)), inst->labels,
          mix_seed(seed, inst->id), draws));
    } catch (const DegenerateBaselineError&) {
      ++skipped;
    }
  }
  const Summary s = summarize(values);
  std::printf("normalized dq (%s, %zu instances, %zu skipped): %.6f +- %.6f\n",
              split.c_str(), s.n, skipped, s.mean, s.sem);
  return kExitOk;
}

int cmd_experiment(const std::string& config, const std::string& out,
                   bool no_timings) {
  const ExperimentConfig c = experiment_config_from_json(read_json(config));
  const ExperimentReport report = run_experiment(c);
  std::cout << format_table(report);
  if (!out.empty()) {
    fs::create_directories(out);
    write_json(fs::path(out) / (report.name + ".json"),
               to_json(report, !no_timings));
  }
  return report.failed() ? kExitFailure : kExitOk;
}

int cmd_repro(const std::string& name, const std::string& out,
              std::optional<std::size_t> trials, std::uint64_t seed) {
  ReproOptions options;
  options.trials = trials;
  options.seed = seed;
  const ReproResult result = run_repro(name, options);
  write_repro(result, out);
  for (const auto& rep : result.reports) std::cout << format_table(rep) << '\n';
  if (!result.extra.is_null()) std::cout << result.extra.dump(2) << '\n';
  std::cout << format_checks(result);
  return result.passed() ? kExitOk : kExitAcceptance;
}

int cmd_timing(const std::string& path) {
  const Json j = read_json(path);
  // Accepts an experiment report or a repro file with a "reports" array.
  if (j.contains("reports")) {
    for (const auto& r : j["reports"]) {
      const ExperimentReport rep = experiment_report_from_json(r);
      std::cout << rep.name << '\n' << step_timing_summary(rep) << '\n';
    }
  } else {
    std::cout << step_timing_summary(experiment_report_from_json(j));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"egl-lab: learned decision losses for predict-then-optimize"};
  app.require_subcommand(1);

  std::string domain = "cubic", out, name, config, data, sampler = "gaussian",
              samples, family = "dwmse", mode = "lodl", loss, split = "test",
              report;
  std::size_t instances = 150, k = 32, hidden_width = 64, epochs = 100,
              draws = 100;
  std::uint64_t seed = 0;
  double sigma = 1.0, lr = 1e-2;
  std::vector<std::size_t> hidden;
  std::optional<std::size_t> trials;
  bool no_timings = false;

  auto* gen = app.add_subcommand("generate", "generate and split a dataset");
  gen->add_option("--domain", domain, "cubic | cubic_hard | webadv | portfolio");
  gen->add_option("--instances", instances, "number of instances");
  gen->add_option("--seed", seed);
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--name", name, "file stem (default: domain)");
  gen->add_option("--config", config, "dataset spec JSON (overrides flags)");

  auto* smp = app.add_subcommand("sample", "Steps 1-2: samples and regrets");
  smp->add_option("--data", data, "dataset .meta file")->required();
  smp->add_option("--sampler", sampler, "gaussian | model_based");
  smp->add_option("--samples", k, "K per instance");
  smp->add_option("--sigma", sigma);
  smp->add_option("--seed", seed);
  smp->add_option("--config", config, "sampler config JSON (overrides flags)");
  smp->add_option("--out", out, "loss dataset file")->required();

  auto* fit = app.add_subcommand("fit-loss", "Step 3: fit learned losses");
  fit->add_option("--data", data)->required();
  fit->add_option("--samples", samples, "loss dataset file")->required();
  fit->add_option("--family", family,
                  "wmse | dwmse | quadratic | dquadratic | lz | mse");
  fit->add_option("--mode", mode, "lodl | fbp");
  fit->add_option("--hidden", hidden_width, "fbp hidden width");
  fit->add_option("--seed", seed);
  fit->add_option("--out", out, "fitted loss file")->required();

  auto* trn = app.add_subcommand("train", "Step 4: train the predictive model");
  trn->add_option("--data", data)->required();
  trn->add_option("--loss", loss, "fitted loss file (default: MSE)");
  trn->add_option("--hidden", hidden, "hidden widths")->delimiter(',');
  trn->add_option("--epochs", epochs);
  trn->add_option("--lr", lr);
  trn->add_option("--seed", seed);
  trn->add_option("--out", out, "model checkpoint")->required();

  auto* ev = app.add_subcommand("evaluate", "normalized decision quality");
  ev->add_option("--data", data)->required();
  ev->add_option("--model", loss, "model checkpoint")->required();
  ev->add_option("--split", split, "train | validation | test");
  ev->add_option("--seed", seed, "baseline seed");
  ev->add_option("--draws", draws, "baseline draws");

  auto* exp = app.add_subcommand("experiment", "configured experiments");
  exp->require_subcommand(1);
  auto* run = exp->add_subcommand("run", "run an experiment config");
  run->add_option("--config", config, "experiment JSON")->required();
  run->add_option("--out", out, "report directory");
  run->add_flag("--no-timings", no_timings, "omit wall times from the report");

  auto* rep = app.add_subcommand("repro", "run a named reproduction bundle");
  rep->add_option("name", name, "bundle name")
      ->required()
      ->check(CLI::IsMember(repro_names()));
  rep->add_option("--out", out, "output directory")->required();
  rep->add_option("--trials", trials, "override the trial count");
  rep->add_option("--seed", seed, "base seed")->default_val(20240601);

  auto* tim = app.add_subcommand("timing", "per-step time table of a report");
  tim->add_option("report", report, "report JSON")->required();

  CLI11_PARSE(app, argc, argv);
  kernels::apply_thread_cap_from_env();
  kernels::retain_freed_memory();

  try {
    if (*gen) return cmd_generate(domain, instances, seed, out, name, config);
    if (*smp) return cmd_sample(data, sampler, k, sigma, seed, config, out);
    if (*fit) {
      return cmd_fit_loss(data, samples, family, mode, hidden_width, seed, out);
    }
    if (*trn) return cmd_train(data, loss, hidden, epochs, lr, seed, out);
    if (*ev) return cmd_evaluate(data, loss, split, seed, draws);
    if (*run) return cmd_experiment(config, out, no_timings);
    if (*rep) return cmd_repro(name, out, trials, seed);
    if (*tim) return cmd_timing(report);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CapabilityError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
