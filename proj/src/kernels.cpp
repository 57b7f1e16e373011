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

#include "egl/kernels.hpp"

#include <chrono>
#include <cstdlib>
#include <string>

#include <malloc.h>
#include <omp.h>

namespace egl::kernels {

int worker_count() { return omp_get_max_threads(); }

void apply_thread_cap_from_env() {
  const char* raw = std::getenv("EGL_LAB_THREADS");
  if (raw == nullptr || *raw == '\0') return;
  int cap = 0;
  try {
    cap = std::stoi(raw);
  } catch (const std::exception&) {
    throw ConfigError("EGL_LAB_THREADS must be a positive integer");
  }
  if (cap <= 0) throw ConfigError("EGL_LAB_THREADS must be a positive integer");
  if (cap < omp_get_max_threads()) omp_set_num_threads(cap);
}

void retain_freed_memory() {
#ifdef M_MMAP_THRESHOLD
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
}

namespace detail {

void run_parallel(std::size_t n, void (*thunk)(void*, std::size_t),
                  void* ctx, std::vector<std::exception_ptr>& errors) {
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      thunk(ctx, static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
}

}  // namespace detail

GradientResult batch_gradient(const Mlp& model,
                              const ExampleObjective& objective,
                              std::span<const std::size_t> examples,
                              ExecutionPolicy policy) {
  GradientResult result;
  result.grad.assign(model.num_params(), 0.0);
  if (examples.empty()) return result;
  const double scale = 1.0 / static_cast<double>(examples.size());
  std::vector<AlignedBuffer> partial(examples.size());
  std::vector<double> losses(examples.size());
  parallel_for(examples.size(), policy, [&](std::size_t i) {
    partial[i].assign(model.num_params(), 0.0);
    losses[i] =
        example_gradient(model, objective, examples[i], scale, partial[i]);
  });
  for (std::size_t i = 0; i < examples.size(); ++i) {
    result.loss += losses[i] * scale;
    for (std::size_t p = 0; p < result.grad.size(); ++p) {
      result.grad[p] += partial[i][p];
    }
  }
  return result;
}

double mean_loss(const Mlp& model, const ExampleObjective& objective,
                 std::span<const std::size_t> examples,
                 ExecutionPolicy policy) {
  if (examples.empty()) return 0.0;
  std::vector<double> losses(examples.size());
  parallel_for(examples.size(), policy, [&](std::size_t i) {
    const Vector out = predict_example(model, objective.inputs(examples[i]));
    losses[i] = objective.evaluate(examples[i], out, nullptr);
  });
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(examples.size());
}

void evaluate_regrets(const DecisionProblem& problem,
                      std::span<const Vector* const> predictions,
                      std::span<const Vector* const> labels,
                      std::span<const double> optimal,
                      std::span<double> regrets, std::span<double> seconds,
                      ExecutionPolicy policy) {
  const std::size_t n = predictions.size();
  if (labels.size() != n || optimal.size() != n || regrets.size() != n ||
      seconds.size() != n) {
    throw InputError("evaluate_regrets: span lengths differ");
  }
  parallel_for(n, policy, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    regrets[i] =
        optimal[i] - decision_quality(problem, *predictions[i], *labels[i]);
    seconds[i] = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  });
}

}  // namespace egl::kernels
