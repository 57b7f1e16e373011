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

#include "egl/core.hpp"

#include <cmath>
#include <random>

namespace egl {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
    case Split::kUnassigned:
      break;
  }
  return "unassigned";
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  if (name == "unassigned") return Split::kUnassigned;
  throw InputError("unknown split '" + std::string(name) + "'");
}

std::size_t PtoInstance::outputs_per_feature() const {
  if (features.empty()) return 0;
  return dimension() / features.size();
}

void PtoInstance::validate() const {
  if (features.empty() || dimension() % features.size() != 0) {
    throw InputError("instance " + std::to_string(id) + ": " +
                     std::to_string(features.size()) +
                     " feature vectors do not group " +
                     std::to_string(dimension()) + " labels");
  }
  check_finite(labels, "labels");
  const auto width = features.front().size();
  for (const auto& f : features) {
    if (f.size() != width) {
      throw InputError("instance " + std::to_string(id) +
                       ": ragged feature vectors");
    }
    check_finite(f, "features");
  }
}

std::size_t prediction_feature_width(const PtoInstance& instance) {
  const std::size_t per = instance.outputs_per_feature();
  const auto base = static_cast<std::size_t>(instance.features.front().size());
  return per > 1 ? base + per : base;
}

Vector prediction_feature(const PtoInstance& instance, std::size_t n) {
  const std::size_t per = instance.outputs_per_feature();
  const Vector& group = instance.features.at(n / per);
  if (per == 1) return group;
  Vector out = Vector::Zero(group.size() + static_cast<Eigen::Index>(per));
  out.head(group.size()) = group;
  out(group.size() + static_cast<Eigen::Index>(n % per)) = 1.0;
  return out;
}

Matrix feature_matrix(const PtoInstance& instance) {
  const auto rows = instance.features.front().size();
  Matrix out(rows, static_cast<Eigen::Index>(instance.features.size()));
  for (std::size_t g = 0; g < instance.features.size(); ++g) {
    out.col(static_cast<Eigen::Index>(g)) = instance.features[g];
  }
  return out;
}

std::vector<Decision> DecisionProblem::enumerate_feasible() const {
  throw CapabilityError(metadata().domain +
                        ": feasible set cannot be enumerated");
}

double decision_quality(const DecisionProblem& problem, const Vector& predicted,
                        const Vector& labels) {
  check_dimension(predicted.size(), problem.dimension(), "predictions");
  check_dimension(labels.size(), problem.dimension(), "labels");
  check_finite(predicted, "predictions");
  check_finite(labels, "labels");
  return problem.objective(problem.solve(predicted), labels);
}

double dq_regret(const DecisionProblem& problem, const Vector& predicted,
                 const Vector& labels) {
  return decision_quality(problem, labels, labels) -
         decision_quality(problem, predicted, labels);
}

double baseline_dq(const DecisionProblem& problem, const Vector& labels,
                   std::uint64_t seed, std::size_t num_draws) {
  if (num_draws == 0) throw InputError("num_baseline_draws must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector draw(labels.size());
  double total = 0.0;
  for (std::size_t d = 0; d < num_draws; ++d) {
    for (Eigen::Index i = 0; i < draw.size(); ++i) draw(i) = unit(rng);
    total += decision_quality(problem, draw, labels);
  }
  return total / static_cast<double>(num_draws);
}

double normalize_dq(double dq, double optimal, double baseline) {
  const double denominator = optimal - baseline;
  if (std::abs(denominator) < 1e-12) {
    throw DegenerateBaselineError(
        "normalized DQ undefined: optimal and random-baseline DQ coincide");
  }
  return (dq - baseline) / denominator;
}

double normalized_dq(const DecisionProblem& problem, const Vector& predicted,
                     const Vector& labels, std::uint64_t seed,
                     std::size_t num_baseline_draws) {
  const double dq = decision_quality(problem, predicted, labels);
  const double optimal = decision_quality(problem, labels, labels);
  const double baseline =
      baseline_dq(problem, labels, seed, num_baseline_draws);
  return normalize_dq(dq, optimal, baseline);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void check_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    throw InputError(std::string(what) + " contain non-finite entries");
  }
}

void check_dimension(std::size_t actual, std::size_t expected,
                     std::string_view what) {
  if (actual != expected) {
    throw InputError(std::string(what) + ": expected length " +
                     std::to_string(expected) + ", got " +
                     std::to_string(actual));
  }
}

}  // namespace egl
