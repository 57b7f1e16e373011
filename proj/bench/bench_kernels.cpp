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

// Serial reference vs OpenMP kernels. Run with EGL_LAB_THREADS to vary the
// worker count.

#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "egl/core.hpp"
#include "egl/datagen.hpp"
#include "egl/kernels.hpp"
#include "egl/losses.hpp"
#include "egl/sampling.hpp"
#include "egl/tensor_nn.hpp"

namespace {

using namespace egl;

ExecutionPolicy policy_of(const benchmark::State& state) {
  return state.range(0) == 0 ? ExecutionPolicy::kSerial
                             : ExecutionPolicy::kParallel;
}

struct Fixture {
  Dataset ds;
  std::shared_ptr<const DecisionProblem> problem;
  std::vector<const PtoInstance*> instances;
  std::vector<CandidateSample> samples;

  explicit Fixture(Domain domain) {
    ds = generate(default_spec(domain, 64, 7));
    problem = make_problem(ds);
    for (const auto& inst : ds.instances) {
      instances.push_back(&inst);
      auto s = gaussian_sample(inst, 0.1, 32, inst.id);
      samples.insert(samples.end(), s.begin(), s.end());
    }
  }
};

const Fixture& webadv() {
  static const Fixture f(Domain::kWebAdv);
  return f;
}

void BM_BuildLossDataset(benchmark::State& state) {
  const Fixture& f = webadv();
  LossDatasetOptions options;
  options.policy = policy_of(state);
  for (auto _ : state) {
    auto out = build_loss_dataset(f.samples, *f.problem, f.instances, options);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(f.samples.size()));
}
BENCHMARK(BM_BuildLossDataset)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BatchGradient(benchmark::State& state) {
  const Fixture& f = webadv();
  std::vector<Matrix> inputs;
  std::vector<Vector> targets;
  for (const auto* inst : f.instances) {
    inputs.push_back(feature_matrix(*inst));
    targets.push_back(inst->labels);
  }
  const MseObjective objective(inputs, targets);
  Mlp model = make_predictive_model(*f.instances.front(),
                                    std::vector<std::size_t>{64, 64}, 1);
  std::vector<std::size_t> all(objective.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (auto _ : state) {
    auto g = kernels::batch_gradient(model, objective, all, policy_of(state));
    benchmark::DoNotOptimize(g.grad.data());
  }
}
BENCHMARK(BM_BatchGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_FitLodlBatch(benchmark::State& state) {
  const Fixture& f = webadv();
  LossDatasetOptions options;
  options.policy = ExecutionPolicy::kSerial;
  const SampleMap samples = group_by_instance(
      build_loss_dataset(f.samples, *f.problem, f.instances, options));
  LossFitConfig config;
  config.family = LossFamily::kDirectedWeightedMse;
  config.steps = 50;
  for (auto _ : state) {
    auto fits = fit_lodl_batch(samples, f.instances, config, policy_of(state));
    benchmark::DoNotOptimize(fits.data());
  }
}
BENCHMARK(BM_FitLodlBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  egl::kernels::apply_thread_cap_from_env();
  egl::kernels::retain_freed_memory();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
