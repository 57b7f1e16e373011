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

// Domain-agnostic decision-problem abstractions and decision-quality metrics.

#ifndef EGL_CORE_HPP_
#define EGL_CORE_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "egl/errors.hpp"

namespace egl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Flat storage that Eigen maps and writes into. Eigen handles an unaligned
// head with scalar code, so rounding would otherwise follow the heap address.
using AlignedBuffer = std::vector<double, Eigen::aligned_allocator<double>>;

// Absolute tolerance for floating comparisons unless a call site says
// otherwise.
inline constexpr double kTolerance = 1e-9;

// Kernels take a policy: kSerial is the reference loop, kParallel fans out
// over OpenMP threads with a fixed reduction order, so both give identical
// results.
enum class ExecutionPolicy { kSerial, kParallel };

enum class Split { kUnassigned, kTrain, kValidation, kTest };

std::string_view to_string(Split split);
Split split_from_string(std::string_view name);

// One decision-making instance. Labels are grouped by feature vector: each
// entry of `features` produces labels.size() / features.size() consecutive
// labels (1 for cubic and portfolio, N users for a web-advertising site).
struct PtoInstance {
  std::uint64_t id = 0;
  Split split = Split::kUnassigned;
  Vector labels;
  std::vector<Vector> features;

  std::size_t dimension() const { return static_cast<std::size_t>(labels.size()); }
  std::size_t outputs_per_feature() const;
  // Throws InputError unless the grouping divides evenly and every entry is
  // finite.
  void validate() const;
};

// Feature vector attached to label `n`: the group feature, followed by a
// one-hot position code when a group produces more than one label.
Vector prediction_feature(const PtoInstance& instance, std::size_t n);
std::size_t prediction_feature_width(const PtoInstance& instance);

// Group features as columns; the predictive model maps each column to
// outputs_per_feature() predictions.
Matrix feature_matrix(const PtoInstance& instance);

struct Decision {
  Vector z;
};

struct ProblemMetadata {
  std::string domain;
  std::size_t dimension = 0;
  std::size_t k = 0;
  double risk_aversion = 0.0;
};

// A parameterized optimization task z*(y) = argmax_{z in Omega} f(z; y).
// Implementations are immutable after construction.
class DecisionProblem {
 public:
  virtual ~DecisionProblem() = default;

  virtual std::size_t dimension() const = 0;
  virtual Decision solve(const Vector& predictions) const = 0;
  virtual double objective(const Decision& decision,
                           const Vector& labels) const = 0;
  virtual bool is_feasible(const Decision& decision) const = 0;
  // True when solve() returns a global maximizer.
  virtual bool exact() const { return true; }
  // Worst-case objective shortfall of solve() for inexact solvers.
  virtual double solver_tolerance() const { return 0.0; }
  virtual ProblemMetadata metadata() const = 0;
  // Complete enumeration of the feasible set in a deterministic order.
  virtual std::vector<Decision> enumerate_feasible() const;
};

// DQ(yhat, y) = f(z*(yhat); y).
double decision_quality(const DecisionProblem& problem, const Vector& predicted,
                        const Vector& labels);

// DQ(y, y) - DQ(yhat, y).
double dq_regret(const DecisionProblem& problem, const Vector& predicted,
                 const Vector& labels);

// Mean DQ of predictions drawn uniformly from [0,1]^D.
double baseline_dq(const DecisionProblem& problem, const Vector& labels,
                   std::uint64_t seed, std::size_t num_draws);

// (dq - baseline) / (optimal - baseline), with the degenerate-denominator
// guard.
double normalize_dq(double dq, double optimal, double baseline);

double normalized_dq(const DecisionProblem& problem, const Vector& predicted,
                     const Vector& labels, std::uint64_t seed,
                     std::size_t num_baseline_draws = 100);

// splitmix64 finalizer; used to derive independent seed streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

void check_finite(const Vector& v, std::string_view what);
void check_dimension(std::size_t actual, std::size_t expected,
                     std::string_view what);

}  // namespace egl

#endif  // EGL_CORE_HPP_
