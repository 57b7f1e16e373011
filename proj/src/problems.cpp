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

#include "egl/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace egl {
namespace {

constexpr double kMaxEnumeration = 1e6;
constexpr double kSimplexTolerance = 1e-8;

bool is_binary_with_count(const Vector& z, std::size_t count) {
  std::size_t ones = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z(i) == 1.0) {
      ++ones;
    } else if (z(i) != 0.0) {
      return false;
    }
  }
  return ones == count;
}

Decision indicator(std::size_t n, std::span<const std::size_t> chosen) {
  Decision d{Vector::Zero(static_cast<Eigen::Index>(n))};
  for (auto i : chosen) d.z(static_cast<Eigen::Index>(i)) = 1.0;
  return d;
}

void check_enumerable(std::size_t n, std::size_t k, const std::string& what) {
  if (binomial(n, k) > kMaxEnumeration) {
    throw CapabilityError(what + ": feasible set has more than 1e6 elements");
  }
}

}  // namespace

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double result = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return result;
}

void for_each_combination(
    std::size_t n, std::size_t k,
    const std::function<void(std::span<const std::size_t>)>& visit) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    visit(idx);
    // Advance the rightmost index that still has room.
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + (pos - 1)) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// ---------------------------------------------------------------------------
// Top-K

Decision topk_solve(const Vector& predictions, std::size_t k) {
  const auto n = static_cast<std::size_t>(predictions.size());
  if (k > n) {
    throw InputError("top-k: K=" + std::to_string(k) + " exceeds D=" +
                     std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return predictions(static_cast<Eigen::Index>(a)) >
                            predictions(static_cast<Eigen::Index>(b));
                   });
  return indicator(n, std::span(order).first(k));
}

TopKProblem::TopKProblem(std::size_t dimension, std::size_t k)
    : dimension_(dimension), k_(k) {
  if (k == 0 || k > dimension) {
    throw InputError("top-k: require 1 <= K <= D");
  }
}

Decision TopKProblem::solve(const Vector& predictions) const {
  check_dimension(predictions.size(), dimension_, "top-k predictions");
  return topk_solve(predictions, k_);
}

double TopKProblem::objective(const Decision& decision,
                              const Vector& labels) const {
  check_dimension(decision.z.size(), dimension_, "top-k decision");
  check_dimension(labels.size(), dimension_, "top-k labels");
  return decision.z.dot(labels);
}

bool TopKProblem::is_feasible(const Decision& decision) const {
  return static_cast<std::size_t>(decision.z.size()) == dimension_ &&
         is_binary_with_count(decision.z, k_);
}

ProblemMetadata TopKProblem::metadata() const {
  return {.domain = "topk", .dimension = dimension_, .k = k_};
}

std::vector<Decision> TopKProblem::enumerate_feasible() const {
  check_enumerable(dimension_, k_, "top-k");
  std::vector<Decision> out;
  for_each_combination(dimension_, k_, [&](std::span<const std::size_t> c) {
    out.push_back(indicator(dimension_, c));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Web advertising

double webadv_objective(const Decision& decision, const Vector& ctr_flat) {
  const auto sites = decision.z.size();
  if (sites == 0 || ctr_flat.size() % sites != 0) {
    throw InputError("web-adv: CTR matrix of length " +
                     std::to_string(ctr_flat.size()) +
                     " does not match " + std::to_string(sites) + " sites");
  }
  const auto users = ctr_flat.size() / sites;
  double total = 0.0;
  for (Eigen::Index j = 0; j < users; ++j) {
    double miss = 1.0;
    for (Eigen::Index i = 0; i < sites; ++i) {
      const double ctr = std::clamp(ctr_flat(i * users + j), 0.0, 1.0);
      miss *= 1.0 - decision.z(i) * ctr;
    }
    total += 1.0 - miss;
  }
  return total;
}

namespace {

// Clamped CTRs and the per-user miss probability of a subset, reused by both
// solvers.
struct CoverageTable {
  std::size_t sites;
  std::size_t users;
  Matrix ctr;  // sites x users, clamped

  CoverageTable(const Vector& flat, std::size_t m, std::size_t n)
      : sites(m), users(n), ctr(static_cast<Eigen::Index>(m),
                                static_cast<Eigen::Index>(n)) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        ctr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            std::clamp(flat(static_cast<Eigen::Index>(i * n + j)), 0.0, 1.0);
      }
    }
  }

  double value(std::span<const std::size_t> subset) const {
    double total = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(users); ++j) {
      double miss = 1.0;
      for (auto i : subset) miss *= 1.0 - ctr(static_cast<Eigen::Index>(i), j);
      total += 1.0 - miss;
    }
    return total;
  }
};

}  // namespace

WebAdvSolution webadv_solve(const Vector& ctr_flat, std::size_t k,
                            std::size_t sites, std::size_t users,
                            WebAdvSolver solver) {
  check_dimension(ctr_flat.size(), sites * users, "web-adv predictions");
  if (k > sites) throw InputError("web-adv: K exceeds the number of sites");
  const CoverageTable table(ctr_flat, sites, users);
  WebAdvSolution best;

  if (solver == WebAdvSolver::kExact) {
    if (sites > kMaxExactSites) {
      throw CapabilityError("web-adv: exact mode supports at most " +
                            std::to_string(kMaxExactSites) +
                            " sites; use the greedy solver");
    }
    std::vector<std::size_t> best_subset;
    best.value = -std::numeric_limits<double>::infinity();
    for_each_combination(sites, k, [&](std::span<const std::size_t> c) {
      ++best.subsets_evaluated;
      const double v = table.value(c);
      // Strict improvement keeps the lexicographically smallest maximizer.
      if (v > best.value) {
        best.value = v;
        best_subset.assign(c.begin(), c.end());
      }
    });
    best.decision = indicator(sites, best_subset);
    return best;
  }

  std::vector<std::size_t> chosen;
  std::vector<bool> used(sites, false);
  double current = 0.0;
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t pick = sites;
    double pick_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sites; ++i) {
      if (used[i]) continue;
      chosen.push_back(i);
      const double v = table.value(chosen);
      chosen.pop_back();
      ++best.subsets_evaluated;
      if (v > pick_value) {
        pick_value = v;
        pick = i;
      }
    }
    used[pick] = true;
    chosen.push_back(pick);
    current = pick_value;
  }
  std::sort(chosen.begin(), chosen.end());
  best.decision = indicator(sites, chosen);
  best.value = current;
  return best;
}

WebAdvertisingProblem::WebAdvertisingProblem(std::size_t sites,
                                             std::size_t users, std::size_t k,
                                             WebAdvSolver solver)
    : sites_(sites), users_(users), k_(k), solver_(solver) {
  if (sites == 0 || users == 0) throw InputError("web-adv: empty CTR matrix");
  if (k == 0 || k > sites) throw InputError("web-adv: require 1 <= K <= M");
  if (solver == WebAdvSolver::kExact && sites > kMaxExactSites) {
    throw CapabilityError("web-adv: exact mode supports at most " +
                          std::to_string(kMaxExactSites) + " sites");
  }
}

Decision WebAdvertisingProblem::solve(const Vector& predictions) const {
  return webadv_solve(predictions, k_, sites_, users_, solver_).decision;
}

double WebAdvertisingProblem::objective(const Decision& decision,
                                        const Vector& labels) const {
  check_dimension(decision.z.size(), sites_, "web-adv decision");
  check_dimension(labels.size(), sites_ * users_, "web-adv labels");
  return webadv_objective(decision, labels);
}

bool WebAdvertisingProblem::is_feasible(const Decision& decision) const {
  return static_cast<std::size_t>(decision.z.size()) == sites_ &&
         is_binary_with_count(decision.z, k_);
}

ProblemMetadata WebAdvertisingProblem::metadata() const {
  return {.domain = "webadv", .dimension = dimension(), .k = k_};
}

std::vector<Decision> WebAdvertisingProblem::enumerate_feasible() const {
  check_enumerable(sites_, k_, "web-adv");
  std::vector<Decision> out;
  for_each_combination(sites_, k_, [&](std::span<const std::size_t> c) {
    out.push_back(indicator(sites_, c));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Portfolio

double portfolio_objective(const Decision& decision, const Vector& returns,
                           const Matrix& covariance, double risk_aversion) {
  const auto n = static_cast<std::size_t>(covariance.rows());
  check_dimension(decision.z.size(), n, "portfolio decision");
  check_dimension(returns.size(), n, "portfolio returns");
  const Vector& z = decision.z;
  if (z.minCoeff() < -kSimplexTolerance ||
      std::abs(z.sum() - 1.0) > kSimplexTolerance) {
    throw InputError("portfolio: decision is not on the simplex");
  }
  return z.dot(returns) - risk_aversion * z.dot(covariance * z);
}

PortfolioSolution portfolio_solve(const Vector& predictions,
                                  const Matrix& covariance,
                                  double risk_aversion,
                                  const PortfolioSettings& settings) {
  const Eigen::Index n = covariance.rows();
  check_dimension(predictions.size(), static_cast<std::size_t>(n),
                  "portfolio predictions");
  if (risk_aversion < 0.0) throw InputError("portfolio: lambda must be >= 0");

  // Minimize g(z) = -z'y + lambda z'Qz. Start at the best vertex.
  Eigen::Index start = 0;
  double best_vertex = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = predictions(i) - risk_aversion * covariance(i, i);
    if (v > best_vertex) {
      best_vertex = v;
      start = i;
    }
  }
  Vector z = Vector::Zero(n);
  z(start) = 1.0;
  Vector qz = covariance.col(start);
  double gap = std::numeric_limits<double>::infinity();

  for (std::size_t it = 0; it < settings.max_iterations; ++it) {
    const Vector grad = -predictions + 2.0 * risk_aversion * qz;
    const double grad_z = grad.dot(z);

    Eigen::Index s = 0;
    grad.minCoeff(&s);
    Eigen::Index v = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (z(i) > 0.0 && (v < 0 || grad(i) > grad(v))) v = i;
    }
    gap = grad_z - grad(s);
    if (gap < settings.gap_tolerance) {
      return {.decision = {z}, .gap = std::max(gap, 0.0), .iterations = it};
    }
    const double away_gap = grad(v) - grad_z;
    const double zqz = z.dot(qz);

    if (gap >= away_gap) {
      // Toward vertex s: d = e_s - z.
      const double curvature =
          covariance(s, s) - 2.0 * qz(s) + zqz;
      const double slope = grad(s) - grad_z;
      double step = 1.0;
      if (risk_aversion * curvature > 0.0) {
        step = std::min(1.0, -slope / (2.0 * risk_aversion * curvature));
      }
      z *= 1.0 - step;
      z(s) += step;
      qz = (1.0 - step) * qz + step * covariance.col(s);
    } else {
      // Away from vertex v: d = z - e_v.
      const double weight = z(v);
      const double max_step = weight / (1.0 - weight);
      const double curvature = zqz - 2.0 * qz(v) + covariance(v, v);
      const double slope = grad_z - grad(v);
      double step = max_step;
      if (risk_aversion * curvature > 0.0) {
        step = std::min(max_step, -slope / (2.0 * risk_aversion * curvature));
      }
      z *= 1.0 + step;
      z(v) -= step;
      qz = (1.0 + step) * qz - step * covariance.col(v);
      if (step == max_step) z(v) = 0.0;
    }
    // Keep the iterate exactly on the simplex.
    z = z.cwiseMax(0.0);
    z /= z.sum();
    if ((it + 1) % 64 == 0) qz = covariance * z;
  }
  throw SolverError("portfolio: Frank-Wolfe did not reach gap tolerance after " +
                        std::to_string(settings.max_iterations) +
                        " iterations (gap " + std::to_string(gap) + ")",
                    settings.max_iterations, gap, z);
}

PortfolioProblem::PortfolioProblem(Matrix covariance, double risk_aversion,
                                   PortfolioSettings settings)
    : covariance_(std::move(covariance)),
      risk_aversion_(risk_aversion),
      settings_(settings) {
  if (covariance_.rows() != covariance_.cols() || covariance_.rows() == 0) {
    throw InputError("portfolio: covariance must be square and non-empty");
  }
  if (!covariance_.allFinite()) {
    throw InputError("portfolio: covariance has non-finite entries");
  }
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw InputError("portfolio: covariance is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance_,
                                                  Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-9) {
    throw InputError("portfolio: covariance is not positive semidefinite");
  }
  if (risk_aversion < 0.0) throw InputError("portfolio: lambda must be >= 0");
}

Decision PortfolioProblem::solve(const Vector& predictions) const {
  return solve_detailed(predictions).decision;
}

PortfolioSolution PortfolioProblem::solve_detailed(
    const Vector& predictions) const {
  return portfolio_solve(predictions, covariance_, risk_aversion_, settings_);
}

double PortfolioProblem::objective(const Decision& decision,
                                   const Vector& labels) const {
  return portfolio_objective(decision, labels, covariance_, risk_aversion_);
}

bool PortfolioProblem::is_feasible(const Decision& decision) const {
  const Vector& z = decision.z;
  return z.size() == covariance_.rows() &&
         z.minCoeff() >= -kSimplexTolerance &&
         std::abs(z.sum() - 1.0) <= kSimplexTolerance;
}

ProblemMetadata PortfolioProblem::metadata() const {
  return {.domain = "portfolio",
          .dimension = dimension(),
          .risk_aversion = risk_aversion_};
}

}  // namespace egl
