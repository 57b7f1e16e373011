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

// The three benchmark decision problems: top-K selection, web advertising
// (submodular max-coverage over websites) and Markowitz portfolio selection.

#ifndef EGL_PROBLEMS_HPP_
#define EGL_PROBLEMS_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "egl/core.hpp"

namespace egl {

// Binary vector with exactly k ones at the k largest entries; ties go to the
// lowest index.
Decision topk_solve(const Vector& predictions, std::size_t k);

class TopKProblem final : public DecisionProblem {
 public:
  TopKProblem(std::size_t dimension, std::size_t k);

  std::size_t dimension() const override { return dimension_; }
  std::size_t k() const { return k_; }
  Decision solve(const Vector& predictions) const override;
  double objective(const Decision& decision,
                   const Vector& labels) const override;
  bool is_feasible(const Decision& decision) const override;
  ProblemMetadata metadata() const override;
  std::vector<Decision> enumerate_feasible() const override;

 private:
  std::size_t dimension_;
  std::size_t k_;
};

// sum_j (1 - prod_i (1 - z_i * clamp(y_ij))), y row-major by website.
double webadv_objective(const Decision& decision, const Vector& ctr_flat);

enum class WebAdvSolver { kExact, kGreedy };

struct WebAdvSolution {
  Decision decision;
  double value = 0.0;
  std::size_t subsets_evaluated = 0;
};

// Largest site count the exact enumerator accepts.
inline constexpr std::size_t kMaxExactSites = 20;

WebAdvSolution webadv_solve(const Vector& ctr_flat, std::size_t k,
                            std::size_t sites, std::size_t users,
                            WebAdvSolver solver = WebAdvSolver::kExact);

class WebAdvertisingProblem final : public DecisionProblem {
 public:
  WebAdvertisingProblem(std::size_t sites, std::size_t users, std::size_t k,
                        WebAdvSolver solver = WebAdvSolver::kExact);

  std::size_t dimension() const override { return sites_ * users_; }
  std::size_t sites() const { return sites_; }
  std::size_t users() const { return users_; }
  std::size_t k() const { return k_; }
  Decision solve(const Vector& predictions) const override;
  double objective(const Decision& decision,
                   const Vector& labels) const override;
  bool is_feasible(const Decision& decision) const override;
  bool exact() const override { return solver_ == WebAdvSolver::kExact; }
  ProblemMetadata metadata() const override;
  std::vector<Decision> enumerate_feasible() const override;

 private:
  std::size_t sites_;
  std::size_t users_;
  std::size_t k_;
  WebAdvSolver solver_;
};

struct PortfolioSettings {
  std::size_t max_iterations = 10000;
  double gap_tolerance = 1e-8;
};

struct PortfolioSolution {
  Decision decision;
  double gap = 0.0;
  std::size_t iterations = 0;
};

// z'y - lambda * z'Qz; z must lie on the simplex within 1e-8.
double portfolio_objective(const Decision& decision, const Vector& returns,
                           const Matrix& covariance, double risk_aversion);

// Away-step Frank-Wolfe over the probability simplex with exact line search.
// Throws SolverError (carrying the best iterate and its gap) when the
// Frank-Wolfe gap does not drop below settings.gap_tolerance.
PortfolioSolution portfolio_solve(const Vector& predictions,
                                  const Matrix& covariance,
                                  double risk_aversion,
                                  const PortfolioSettings& settings = {});

class PortfolioProblem final : public DecisionProblem {
 public:
  PortfolioProblem(Matrix covariance, double risk_aversion,
                   PortfolioSettings settings = {});

  std::size_t dimension() const override {
    return static_cast<std::size_t>(covariance_.rows());
  }
  const Matrix& covariance() const { return covariance_; }
  double risk_aversion() const { return risk_aversion_; }
  const PortfolioSettings& settings() const { return settings_; }
  Decision solve(const Vector& predictions) const override;
  PortfolioSolution solve_detailed(const Vector& predictions) const;
  double objective(const Decision& decision,
                   const Vector& labels) const override;
  bool is_feasible(const Decision& decision) const override;
  bool exact() const override { return false; }
  double solver_tolerance() const override { return settings_.gap_tolerance; }
  ProblemMetadata metadata() const override;

 private:
  Matrix covariance_;
  double risk_aversion_;
  PortfolioSettings settings_;
};

// Calls `visit` with every k-subset of {0..n-1} in lexicographic order.
void for_each_combination(
    std::size_t n, std::size_t k,
    const std::function<void(std::span<const std::size_t>)>& visit);

double binomial(std::size_t n, std::size_t k);

}  // namespace egl

#endif  // EGL_PROBLEMS_HPP_
