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

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace egl {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::vector<std::size_t> chosen(const Decision& d) {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < d.z.size(); ++i) {
    if (d.z(i) == 1.0) out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

Vector uniform_vector(std::mt19937_64& rng, Eigen::Index n, double lo = 0.0,
                      double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

TEST(TopKTest, Examples) {
  EXPECT_EQ(topk_solve(vec({2, 0, 4}), 1).z, vec({0, 0, 1}));
  EXPECT_EQ(topk_solve(vec({1, 1, 0}), 1).z, vec({1, 0, 0}));
  EXPECT_EQ(topk_solve(vec({3, 1, 2, 5}), 2).z, vec({1, 0, 0, 1}));
  EXPECT_THROW(topk_solve(vec({1, 2}), 3), InputError);
  EXPECT_THROW(TopKProblem(3, 0), InputError);
}

TEST(TopKTest, TiesBreakTowardLowerIndex) {
  EXPECT_EQ(chosen(topk_solve(vec({2, 5, 5, 5, 1}), 2)),
            (std::vector<std::size_t>{1, 2}));
}

TEST(TopKTest, ScaleInvariant) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const Vector y = uniform_vector(rng, 9, -3, 3);
    for (double c : {0.01, 1.0, 7.5}) {
      EXPECT_EQ(topk_solve(c * y, 3).z, topk_solve(y, 3).z);
    }
  }
}

TEST(TopKTest, EnumerationCounts) {
  EXPECT_EQ(TopKProblem(3, 1).enumerate_feasible().size(), 3u);
  EXPECT_EQ(TopKProblem(4, 2).enumerate_feasible().size(), 6u);
  EXPECT_THROW(TopKProblem(60, 30).enumerate_feasible(), CapabilityError);
  for (const auto& d : TopKProblem(5, 2).enumerate_feasible()) {
    EXPECT_TRUE(TopKProblem(5, 2).is_feasible(d));
  }
}

TEST(TopKTest, MatchesEnumerationOracle) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 2 + t % 11;
    const std::size_t k = 1 + t % d;
    const TopKProblem problem(d, k);
    const Vector y = uniform_vector(rng, static_cast<Eigen::Index>(d), -2, 2);
    const double best = oracle::best_subset_value(
        d, k, [&](const auto& s) { return oracle::topk_value(s, y); });
    EXPECT_NEAR(problem.objective(problem.solve(y), y), best, 1e-12);
    for (const auto& z : problem.enumerate_feasible()) {
      EXPECT_GE(problem.objective(problem.solve(y), y) + 1e-12,
                problem.objective(z, y));
    }
  }
}

TEST(WebAdvTest, ObjectiveExamples) {
  Decision none{Vector::Zero(2)};
  EXPECT_DOUBLE_EQ(webadv_objective(none, vec({0.3, 0.4, 0.9, 0.1})), 0.0);
  Decision one{vec({0, 1, 0})};
  Vector ctr = Vector::Zero(12);
  ctr.segment(4, 4).setOnes();
  EXPECT_DOUBLE_EQ(webadv_objective(one, ctr), 4.0);
  Decision both{vec({1, 1})};
  EXPECT_DOUBLE_EQ(webadv_objective(both, vec({0.5, 0.0, 0.5, 1.0})), 1.75);
  EXPECT_THROW(webadv_objective(both, vec({0.5, 0.0, 0.5})), InputError);
}

TEST(WebAdvTest, ClampsCtrs) {
  Decision z{vec({1, 0})};
  EXPECT_DOUBLE_EQ(webadv_objective(z, vec({1.7, -0.4, 0.2, 0.2})), 1.0);
}

TEST(WebAdvTest, ExactEvaluatesAllSubsets) {
  std::mt19937_64 rng(6);
  const Vector ctr = uniform_vector(rng, 50);
  const WebAdvSolution sol = webadv_solve(ctr, 2, 5, 10);
  EXPECT_EQ(sol.subsets_evaluated, 10u);
  const double best = oracle::best_subset_value(
      5, 2, [&](const auto& s) { return oracle::webadv_value(s, ctr, 10); });
  EXPECT_NEAR(sol.value, best, 1e-12);
  EXPECT_EQ(WebAdvertisingProblem(5, 10, 2).enumerate_feasible().size(), 10u);
}

TEST(WebAdvTest, DominantSiteIsChosen) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    Vector ctr = uniform_vector(rng, 40, 0.0, 0.5);
    const Eigen::Index site = t % 4;
    ctr.segment(site * 10, 10) = uniform_vector(rng, 10, 0.5, 1.0);
    EXPECT_EQ(webadv_solve(ctr, 2, 4, 10).decision.z(site), 1.0);
  }
}

TEST(WebAdvTest, GreedyWithinApproximationBound) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    const Vector ctr = uniform_vector(rng, 50);
    const double exact = webadv_solve(ctr, 2, 5, 10).value;
    const double greedy =
        webadv_solve(ctr, 2, 5, 10, WebAdvSolver::kGreedy).value;
    EXPECT_GE(greedy, (1.0 - std::exp(-1.0)) * exact - 1e-12);
    EXPECT_LE(greedy, exact + 1e-12);
  }
}

TEST(WebAdvTest, ExactModeSizeLimit) {
  EXPECT_THROW(WebAdvertisingProblem(21, 2, 2), CapabilityError);
  EXPECT_NO_THROW(WebAdvertisingProblem(21, 2, 2, WebAdvSolver::kGreedy));
}

TEST(WebAdvTest, Submodular) {
  std::mt19937_64 rng(9);
  std::bernoulli_distribution coin(0.5);
  const std::size_t m = 6;
  const std::size_t users = 5;
  for (int t = 0; t < 200; ++t) {
    const Vector ctr = uniform_vector(rng, m * users);
    std::vector<std::size_t> s;
    std::vector<std::size_t> super;
    const std::size_t add = static_cast<std::size_t>(t) % m;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == add) continue;
      const bool in_s = coin(rng);
      if (in_s) s.push_back(i);
      if (in_s || coin(rng)) super.push_back(i);
    }
    auto with = [&](std::vector<std::size_t> v) {
      v.push_back(add);
      return v;
    };
    const double gain_s = oracle::webadv_value(with(s), ctr, users) -
                          oracle::webadv_value(s, ctr, users);
    const double gain_t = oracle::webadv_value(with(super), ctr, users) -
                          oracle::webadv_value(super, ctr, users);
    EXPECT_GE(gain_s, gain_t - 1e-12);
  }
}

TEST(PortfolioTest, ObjectiveExamples) {
  const Matrix q = Matrix::Identity(2, 2);
  EXPECT_DOUBLE_EQ(portfolio_objective({vec({0.5, 0.5})}, vec({1, 2}), q, 0.001),
                   1.4995);
  EXPECT_DOUBLE_EQ(portfolio_objective({vec({0.25, 0.75})}, vec({1, 2}), q, 0.0),
                   1.75);
  Matrix q3(3, 3);
  q3 << 2, 0.5, 0, 0.5, 3, 0.1, 0, 0.1, 4;
  EXPECT_DOUBLE_EQ(
      portfolio_objective({vec({0, 1, 0})}, vec({1, 2, 3}), q3, 0.1),
      2.0 - 0.1 * 3.0);
  EXPECT_THROW(portfolio_objective({vec({0.7, 0.7})}, vec({1, 2}), q, 0.1),
               InputError);
}

TEST(PortfolioTest, LinearCaseIsVertex) {
  const Matrix q = Matrix::Identity(4, 4);
  const auto sol = portfolio_solve(vec({0.1, 0.7, 0.3, -1}), q, 0.0);
  EXPECT_EQ(sol.decision.z, vec({0, 1, 0, 0}));
}

TEST(PortfolioTest, SymmetricInstanceIsUniform) {
  const Matrix q = Matrix::Identity(5, 5);
  const auto sol = portfolio_solve(Vector::Constant(5, 0.3), q, 0.5);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(sol.decision.z(i), 0.2, 1e-6);
}

TEST(PortfolioTest, MatchesSimplexGrid) {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 50; ++t) {
    const Vector y = uniform_vector(rng, 3, -1, 1);
    const Matrix a = Eigen::Map<const Matrix>(uniform_vector(rng, 9, -1, 1).data(), 3, 3);
    const Matrix q = a * a.transpose();
    const double lambda = 0.5;
    const auto sol = portfolio_solve(y, q, lambda);
    const double fw = oracle::portfolio_value(sol.decision.z, y, q, lambda);
    EXPECT_NEAR(fw, oracle::simplex_grid_max(y, q, lambda, 0.01), 1e-4);
    EXPECT_GE(fw + 1e-12, oracle::simplex_grid_max(y, q, lambda, 0.01));
    EXPECT_LT(sol.gap, 1e-8);
  }
}

TEST(PortfolioTest, FrankWolfeGapCertificate) {
  std::mt19937_64 rng(12);
  const Eigen::Index d = 20;
  const Matrix a = Eigen::Map<const Matrix>(
      uniform_vector(rng, d * d, -1, 1).data(), d, d);
  const Matrix q = a * a.transpose() / static_cast<double>(d);
  const Vector y = uniform_vector(rng, d, -0.1, 0.1);
  const auto sol = portfolio_solve(y, q, 0.3);
  const Vector g = y - 2.0 * 0.3 * q * sol.decision.z;
  const double gap = g.maxCoeff() - g.dot(sol.decision.z);
  EXPECT_LE(gap, 1e-8);
  EXPECT_NEAR(sol.decision.z.sum(), 1.0, 1e-12);
  EXPECT_GE(sol.decision.z.minCoeff(), 0.0);
}

TEST(PortfolioTest, NonConvergenceCarriesBestIterate) {
  std::mt19937_64 rng(13);
  const Eigen::Index d = 10;
  const Matrix a = Eigen::Map<const Matrix>(
      uniform_vector(rng, d * d, -1, 1).data(), d, d);
  const Matrix q = a * a.transpose();
  try {
    portfolio_solve(uniform_vector(rng, d), q, 1.0, {.max_iterations = 1});
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.iterations(), 1u);
    EXPECT_GT(e.gap(), 1e-8);
    EXPECT_EQ(e.best_iterate().size(), d);
  }
}

TEST(PortfolioTest, RejectsBadCovariance) {
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.1, 1;
  EXPECT_THROW(PortfolioProblem(asym, 0.1), InputError);
  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  EXPECT_THROW(PortfolioProblem(indefinite, 0.1), InputError);
  EXPECT_THROW(PortfolioProblem(Matrix::Identity(2, 2), 0.1).enumerate_feasible(),
               CapabilityError);
}

}  // namespace
}  // namespace egl
