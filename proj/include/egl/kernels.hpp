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

// Data-parallel kernels. Every kernel takes an ExecutionPolicy: kSerial runs
// the plain reference loop, kParallel splits the index range over OpenMP
// threads. Per-index results are written to their own slots and reduced in
// index order, so both policies return bit-identical values.

#ifndef EGL_KERNELS_HPP_
#define EGL_KERNELS_HPP_

#include <cstddef>
#include <exception>
#include <span>
#include <type_traits>
#include <vector>

#include "egl/core.hpp"
#include "egl/tensor_nn.hpp"

namespace egl::kernels {

// Worker count used by kParallel regions; capped by EGL_LAB_THREADS.
int worker_count();
// Reads EGL_LAB_THREADS (if set) and caps the OpenMP thread count.
void apply_thread_cap_from_env();
// Keeps multi-megabyte activation buffers in the heap instead of returning
// them to the OS after every batch. Process-wide; call once from main().
void retain_freed_memory();

namespace detail {
void run_parallel(std::size_t n, void (*thunk)(void*, std::size_t),
                  void* ctx, std::vector<std::exception_ptr>& errors);
}  // namespace detail

// body(i) for i in [0, n). The first failing index's exception is rethrown
// after the loop, regardless of policy.
template <class Body>
void parallel_for(std::size_t n, ExecutionPolicy policy, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  if (policy == ExecutionPolicy::kSerial) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    auto thunk = [](void* ctx, std::size_t i) {
      (*static_cast<std::remove_reference_t<Body>*>(ctx))(i);
    };
    detail::run_parallel(n, thunk, &body, errors);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Mean loss over `examples` and its gradient w.r.t. the model parameters.
GradientResult batch_gradient(const Mlp& model,
                              const ExampleObjective& objective,
                              std::span<const std::size_t> examples,
                              ExecutionPolicy policy);

double mean_loss(const Mlp& model, const ExampleObjective& objective,
                 std::span<const std::size_t> examples,
                 ExecutionPolicy policy);

// regrets[i] = optimal[i] - f(z*(predictions[i]); labels[i]); seconds[i]
// receives the wall time of each solve.
void evaluate_regrets(const DecisionProblem& problem,
                      std::span<const Vector* const> predictions,
                      std::span<const Vector* const> labels,
                      std::span<const double> optimal,
                      std::span<double> regrets, std::span<double> seconds,
                      ExecutionPolicy policy);

}  // namespace egl::kernels

#endif  // EGL_KERNELS_HPP_
