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

#include "egl/problems.hpp"
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

TEST(DecisionQualityTest, TopOnePicksArgmaxOfPrediction) {
  const TopKProblem problem(3, 1);
  EXPECT_DOUBLE_EQ(decision_quality(problem, vec({2, 0, 4}), vec({1, 5, 3})),
                   3.0);
}

TEST(DecisionQualityTest, PerfectPredictionAttainsOptimum) {
  const TopKProblem problem(4, 2);
  const Vector y = vec({0.3, -1.0, 2.0, 1.5});
  EXPECT_DOUBLE_EQ(decision_quality(problem, y, y), 3.5);
}

TEST(DecisionQualityTest, WebAdvForcedDecision) {
  Decision z;
  z.z = vec({1, 1});
  // Rows are sites: site 0 CTRs (0.5, 0), site 1 CTRs (0.5, 1).
  EXPECT_DOUBLE_EQ(webadv_objective(z, vec({0.5, 0.0, 0.5, 1.0})), 1.75);
}

TEST(DecisionQualityTest, DimensionMismatchIsInputError) {
  const TopKProblem problem(3, 1);
  EXPECT_THROW(decision_quality(problem, vec({1, 2}), vec({1, 2, 3})),
               InputError);
  EXPECT_THROW(decision_quality(problem, vec({1, NAN, 2}), vec({1, 2, 3})),
               InputError);
}

TEST(RegretTest, Examples) {
  const TopKProblem problem(3, 1);
  EXPECT_DOUBLE_EQ(dq_regret(problem, vec({2, 0, 4}), vec({1, 5, 3})), 2.0);
  EXPECT_DOUBLE_EQ(dq_regret(problem, vec({1, 5, 3}), vec({1, 5, 3})), 0.0);
  const TopKProblem pair(2, 1);
  EXPECT_DOUBLE_EQ(dq_regret(pair, vec({1, 0.55}), vec({0, 0.55})), 0.55);
}

TEST(RegretTest, NonnegativeForExactSolvers) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const TopKProblem topk(8, 3);
  const WebAdvertisingProblem web(4, 3, 2);
  for (int t = 0; t < 200; ++t) {
    Vector a(8), b(8), c(12), d(12);
    for (auto* v : {&a, &b}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) (*v)(i) = normal(rng);
    }
    for (auto* v : {&c, &d}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) (*v)(i) = unit(rng);
    }
    EXPECT_GE(dq_regret(topk, a, b), 0.0);
    EXPECT_GE(dq_regret(web, c, d), 0.0);
  }
}

TEST(NormalizedDqTest, TruthScoresOne) {
  const TopKProblem problem(5, 2);
  const Vector y = vec({0.1, 0.9, 0.4, 0.7, 0.2});
  EXPECT_DOUBLE_EQ(normalized_dq(problem, y, y, 3, 100), 1.0);
}

TEST(NormalizedDqTest, SingleBaselineDrawScoresZero) {
  const TopKProblem problem(4, 1);
  const Vector y = vec({3, 1, 4, 1});
  const std::uint64_t seed = 99;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector draw(4);
  for (Eigen::Index i = 0; i < 4; ++i) draw(i) = unit(rng);
  EXPECT_DOUBLE_EQ(normalized_dq(problem, draw, y, seed, 1), 0.0);
}

TEST(NormalizedDqTest, WrongPickIsNegative) {
  const TopKProblem problem(2, 1);
  const double ndq = normalized_dq(problem, vec({1, 0}), vec({0, 10}), 5, 100);
  EXPECT_LT(ndq, 0.0);
  // Baseline expectation is 5, so the value sits near -1.
  EXPECT_NEAR(ndq, -1.0, 0.3);
}

TEST(NormalizedDqTest, DegenerateDenominatorThrows) {
  const TopKProblem problem(3, 1);
  EXPECT_THROW(normalized_dq(problem, vec({1, 2, 3}), vec({2, 2, 2}), 0, 10),
               DegenerateBaselineError);
  EXPECT_THROW(normalize_dq(1.0, 1.0, 1.0), DegenerateBaselineError);
  EXPECT_THROW(baseline_dq(problem, vec({1, 2, 3}), 0, 0), InputError);
}

TEST(NormalizedDqTest, RandomPredictionsAverageToZero) {
  const TopKProblem problem(6, 2);
  const Vector y = vec({0.2, 1.4, -0.3, 0.8, 2.1, 0.5});
  const double optimal = decision_quality(problem, y, y);
  const double baseline = baseline_dq(problem, y, 1, 20000);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit;
  const int n = 4000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int t = 0; t < n; ++t) {
    Vector p(6);
    for (Eigen::Index i = 0; i < 6; ++i) p(i) = unit(rng);
    const double v =
        normalize_dq(decision_quality(problem, p, y), optimal, baseline);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum2 / n - mean * mean) * n / (n - 1));
  EXPECT_LT(std::abs(mean), 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST(InstanceTest, ValidateRejectsBadGrouping) {
  PtoInstance inst;
  inst.labels = vec({1, 2, 3});
  inst.features = {vec({1}), vec({2})};
  EXPECT_THROW(inst.validate(), InputError);
  inst.features = {vec({1}), vec({2}), vec({NAN})};
  EXPECT_THROW(inst.validate(), InputError);
  inst.features = {vec({1}), vec({2}), vec({3})};
  EXPECT_NO_THROW(inst.validate());
}

TEST(InstanceTest, GroupedFeaturesGetOneHotSuffix) {
  PtoInstance inst;
  inst.labels = Vector::Zero(6);
  inst.features = {vec({7, 8}), vec({9, 10})};
  EXPECT_EQ(inst.outputs_per_feature(), 3u);
  EXPECT_EQ(prediction_feature_width(inst), 5u);
  const Vector f = prediction_feature(inst, 4);
  EXPECT_EQ(f, vec({9, 10, 0, 1, 0}));
}

TEST(SeedTest, MixSeedSeparatesStreams) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(5, 3), mix_seed(5, 3));
}

}  // namespace
}  // namespace egl
