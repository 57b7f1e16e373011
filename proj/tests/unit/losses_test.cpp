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

#include "egl/losses.hpp"

#include <cmath>
#include <random>

#include "egl/counterexample.hpp"
#include "egl/problems.hpp"
#include "gtest/gtest.h"
#include "oracles.hpp"

namespace egl {
namespace {

constexpr LossFamily kAllFamilies[] = {
    LossFamily::kMse,         LossFamily::kLz,
    LossFamily::kWeightedMse, LossFamily::kQuadratic,
    LossFamily::kDirectedWeightedMse, LossFamily::kDirectedQuadratic};

constexpr LossFamily kFbpFamilies[] = {
    LossFamily::kWeightedMse, LossFamily::kQuadratic,
    LossFamily::kDirectedWeightedMse, LossFamily::kDirectedQuadratic};

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Vector normal_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

LossParams random_params(std::mt19937_64& rng, LossFamily family,
                         std::size_t d) {
  LossParams p = LossParams::zeros(family, d);
  p.raw = normal_vector(rng, p.raw.size());
  return p;
}

// Residual with no entry near zero so FD steps never cross a branch.
Vector safe_residual(std::mt19937_64& rng, Eigen::Index d) {
  Vector r = normal_vector(rng, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::abs(r(i)) < 0.05) r(i) = r(i) < 0 ? -0.05 : 0.05;
  }
  return r;
}

TEST(LossEvalTest, Examples) {
  LossParams w = LossParams::zeros(LossFamily::kWeightedMse, 2);
  w.raw << softplus_inverse(2.0 - w.w_min), softplus_inverse(1.0 - w.w_min);
  EXPECT_NEAR(loss_eval(w, vec({1, -1}), vec({0, 0})), 3.0, 1e-12);

  LossParams q = LossParams::zeros(LossFamily::kQuadratic, 2, 0.01);
  q.raw << 1, 0, 0, 1;
  EXPECT_NEAR(loss_eval(q, vec({1, 0}), vec({0, 0})), 1.01, 1e-12);

  LossParams lz = LossParams::zeros(LossFamily::kLz, 3);
  lz.raw(0) = softplus_inverse(0.5 - lz.w_min);
  EXPECT_NEAR(loss_eval(lz, vec({1, 2, 2}), vec({0, 0, 0})), 4.5, 1e-12);

  const LossParams mse = LossParams::zeros(LossFamily::kMse, 2);
  EXPECT_DOUBLE_EQ(loss_eval(mse, vec({1, 3}), vec({0, 0})), 5.0);
}

TEST(LossEvalTest, DirectedWeightsFollowResidualSign) {
  LossParams p = LossParams::zeros(LossFamily::kDirectedWeightedMse, 2);
  p.raw << softplus_inverse(3.0 - p.w_min), softplus_inverse(3.0 - p.w_min),
      softplus_inverse(0.5 - p.w_min), softplus_inverse(0.5 - p.w_min);
  EXPECT_NEAR(loss_eval(p, vec({1, -1}), vec({0, 0})), 3.5, 1e-12);
  // Zero residual uses the '+' branch; value is zero either way.
  EXPECT_EQ(loss_eval(p, vec({0, 0}), vec({0, 0})), 0.0);
  EXPECT_NEAR((p.weights() - Vector::Constant(2, 3.0)).norm(), 0, 1e-12);
  EXPECT_NEAR((p.weights_minus() - Vector::Constant(2, 0.5)).norm(), 0, 1e-12);
}

TEST(LossEvalTest, DirectedQuadraticMatchesEntrywiseAssembly) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 4;
    const LossParams p = random_params(rng, LossFamily::kDirectedQuadratic, d);
    const Vector r = normal_vector(rng, 4);
    // F u with u = [max(r,0); min(r,0)] and F = [[A, B], [C, E]].
    Vector u(8);
    u << r.cwiseMax(0.0), r.cwiseMin(0.0);
    Matrix f(8, 8);
    f << p.factor(0), p.factor(1), p.factor(2), p.factor(3);
    const double expected = (f * u).squaredNorm() + p.w_min * r.squaredNorm();
    EXPECT_NEAR(loss_eval(p, r, Vector::Zero(4)), expected, 1e-10);
  }
}

TEST(LossEvalTest, ShapeMismatch) {
  const LossParams p = LossParams::zeros(LossFamily::kWeightedMse, 3);
  EXPECT_THROW(loss_eval(p, vec({1, 2}), vec({1, 2})), InputError);
  LossParams bad = LossParams::zeros(LossFamily::kQuadratic, 3);
  bad.raw.resize(4);
  EXPECT_THROW(bad.validate(), InputError);
}

TEST(LossInvariantTest, AnchoredNonnegative) {
  std::mt19937_64 rng(2);
  for (auto family : kAllFamilies) {
    for (int t = 0; t < 50; ++t) {
      const LossParams p = random_params(rng, family, 5);
      const Vector y = normal_vector(rng, 5);
      EXPECT_EQ(loss_eval(p, y, y), 0.0);
      EXPECT_GE(loss_eval(p, normal_vector(rng, 5), y), 0.0);
      if (family != LossFamily::kDirectedWeightedMse &&
          family != LossFamily::kDirectedQuadratic) {
        EXPECT_EQ(loss_grad(p, y, y), Vector::Zero(5));
      }
    }
  }
}

TEST(LossGradTest, WeightedClosedForm) {
  LossParams p = LossParams::zeros(LossFamily::kWeightedMse, 3);
  p.raw << 0.1, -0.4, 2.0;
  const Vector r = vec({0.5, -1.0, 2.0});
  EXPECT_LT((loss_grad(p, r, Vector::Zero(3)) - 2.0 * p.weights().cwiseProduct(r))
                .norm(),
            1e-12);
}

TEST(LossGradTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (auto family : kAllFamilies) {
    for (int t = 0; t < 50; ++t) {
      const LossParams p = random_params(rng, family, 6);
      const Vector y = normal_vector(rng, 6);
      const Vector y_hat = y + safe_residual(rng, 6);
      const Vector fd = oracle::central_difference(
          [&](const Vector& v) { return loss_eval(p, v, y); }, y_hat);
      EXPECT_LT(oracle::relative_error(loss_grad(p, y_hat, y), fd), 1e-4)
          << to_string(family);
    }
  }
}

TEST(LossGradTest, ParameterGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (auto family : kAllFamilies) {
    if (family == LossFamily::kMse) continue;
    for (int t = 0; t < 50; ++t) {
      LossParams p = random_params(rng, family, 4);
      const Vector y = normal_vector(rng, 4);
      const Vector y_hat = y + safe_residual(rng, 4);
      std::vector<double> g(static_cast<std::size_t>(p.raw.size()), 0.0);
      const double value = loss_eval_param_grad(p, y_hat, y, 1.0, g);
      EXPECT_NEAR(value, loss_eval(p, y_hat, y), 1e-12);
      const Vector fd = oracle::central_difference(
          [&](const Vector& raw) {
            LossParams q = p;
            q.raw = raw;
            return loss_eval(q, y_hat, y);
          },
          p.raw);
      const Vector rev = Eigen::Map<const Vector>(g.data(), fd.size());
      EXPECT_LT(oracle::relative_error(rev, fd), 1e-4) << to_string(family);
    }
  }
}

double min_eigen(const Matrix& h) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (h + h.transpose()))
      .eigenvalues()
      .minCoeff();
}

TEST(ConvexityTest, HessianBounds) {
  std::mt19937_64 rng(5);
  for (auto family : kAllFamilies) {
    if (family == LossFamily::kMse) continue;
    for (int t = 0; t < 50; ++t) {
      const LossParams p = random_params(rng, family, 5);
      const Vector r = normal_vector(rng, 5);
      const Matrix h = loss_hessian(p, r);
      EXPECT_GE(min_eigen(h), 2.0 * p.w_min * (1.0 - 1e-9)) << to_string(family);
      // The Hessian reproduces the loss on the residual's orthant.
      EXPECT_NEAR(0.5 * r.dot(h * r), loss_eval(p, r, Vector::Zero(5)), 1e-9);
    }
  }
}

TEST(ConvexityTest, DirectedConvexWithinOrthant) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  for (auto family :
       {LossFamily::kDirectedWeightedMse, LossFamily::kDirectedQuadratic}) {
    for (int t = 0; t < 50; ++t) {
      const LossParams p = random_params(rng, family, 4);
      Vector sign(4);
      for (Eigen::Index i = 0; i < 4; ++i) sign(i) = (t >> i) & 1 ? 1.0 : -1.0;
      Vector a(4), b(4);
      for (Eigen::Index i = 0; i < 4; ++i) {
        a(i) = sign(i) * unit(rng);
        b(i) = sign(i) * unit(rng);
      }
      const Vector zero = Vector::Zero(4);
      for (double lam : {0.25, 0.5, 0.75}) {
        const double mid = loss_eval(p, lam * a + (1 - lam) * b, zero);
        EXPECT_LE(mid, lam * loss_eval(p, a, zero) +
                           (1 - lam) * loss_eval(p, b, zero) + 1e-12);
      }
    }
  }
}

std::vector<CandidateSample> planted_samples(double w, std::size_t count,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<CandidateSample> out;
  for (std::size_t i = 0; i < count; ++i) {
    CandidateSample s;
    s.sample_index = i;
    s.prediction = Vector::Constant(1, normal(rng));
    s.regret = w * s.prediction.squaredNorm();
    out.push_back(s);
  }
  return out;
}

TEST(FitLodlTest, RecoversPlantedWeight) {
  const auto samples = planted_samples(2.5, 40, 1);
  std::vector<double> d2;
  std::vector<double> r;
  for (const auto& s : samples) {
    d2.push_back(s.prediction.squaredNorm());
    r.push_back(s.regret);
  }
  EXPECT_NEAR(oracle::closed_form_weight(d2, r), 2.5, 1e-12);
  EXPECT_NEAR(lz_closed_form_weight(samples, Vector::Zero(1)), 2.5, 1e-12);
  for (auto family : {LossFamily::kWeightedMse, LossFamily::kLz,
                      LossFamily::kQuadratic}) {
    LossFitConfig config;
    config.family = family;
    const LossFit fit = fit_lodl(samples, Vector::Zero(1), config);
    EXPECT_NEAR(loss_eval(fit.params, Vector::Ones(1), Vector::Zero(1)), 2.5,
                1e-2)
        << to_string(family);
    EXPECT_LT(fit.fit_mse, 1e-3);
  }
}

TEST(FitLodlTest, ZeroRegretsCollapseToFloor) {
  auto samples = planted_samples(0.0, 20, 2);
  LossFitConfig config;
  config.family = LossFamily::kWeightedMse;
  const LossFit fit = fit_lodl(samples, Vector::Zero(1), config);
  EXPECT_LT(fit.params.weights()(0), config.w_min + 1e-3);
  EXPECT_GT(fit.params.weights()(0), config.w_min);
}

TEST(FitLodlTest, ErrorsOnBadInput) {
  LossFitConfig config;
  EXPECT_THROW(fit_lodl({}, Vector::Zero(1), config), InputError);
  auto samples = planted_samples(1.0, 3, 3);
  samples[1].regret = std::nan("");
  EXPECT_THROW(fit_lodl(samples, Vector::Zero(1), config), InputError);
}

TEST(FitLodlTest, CounterexampleBlueMatchesClosedForm) {
  // Blue instance: y = (0, 0.55); A's prediction sweeps -1 + k/7.
  const TopKProblem problem(2, 1);
  const Vector y = vec({0.0, 0.55});
  std::vector<CandidateSample> samples;
  std::vector<double> d2;
  std::vector<double> r;
  for (int k = 0; k <= 14; ++k) {
    CandidateSample s;
    s.sample_index = static_cast<std::size_t>(k);
    s.prediction = vec({-1.0 + k / 7.0, 0.55});
    s.regret = dq_regret(problem, s.prediction, y);
    d2.push_back((s.prediction - y).squaredNorm());
    r.push_back(s.regret);
    samples.push_back(s);
  }
  LossFitConfig config;
  config.family = LossFamily::kLz;
  config.steps = 3000;
  const LossFit fit = fit_lodl(samples, y, config);
  EXPECT_NEAR(fit.params.weights()(0), oracle::closed_form_weight(d2, r), 1e-3);
}

TEST(FitLodlTest, BatchMatchesSingleFits) {
  std::mt19937_64 rng(7);
  std::vector<PtoInstance> instances(5);
  SampleMap map;
  for (std::uint64_t i = 0; i < 5; ++i) {
    auto& inst = instances[i];
    inst.id = i;
    inst.labels = normal_vector(rng, 3);
    for (int n = 0; n < 3; ++n) inst.features.push_back(Vector::Zero(1));
    for (std::size_t s = 0; s < 8; ++s) {
      CandidateSample c;
      c.instance_id = i;
      c.sample_index = s;
      c.prediction = inst.labels + normal_vector(rng, 3);
      c.regret = (c.prediction - inst.labels).cwiseAbs().sum();
      map[i].push_back(c);
    }
  }
  std::vector<const PtoInstance*> ptrs;
  for (const auto& inst : instances) ptrs.push_back(&inst);
  LossFitConfig config;
  config.family = LossFamily::kDirectedWeightedMse;
  const auto serial = fit_lodl_batch(map, ptrs, config, ExecutionPolicy::kSerial);
  const auto parallel = fit_lodl_batch(map, ptrs, config, ExecutionPolicy::kParallel);
  for (std::size_t i = 0; i < 5; ++i) {
    const LossFit single = fit_lodl(map[i], instances[i].labels, config);
    EXPECT_EQ(serial[i].params.raw, single.params.raw);
    EXPECT_EQ(parallel[i].params.raw, single.params.raw);
    EXPECT_NEAR(fit_error(single.params, map[i], instances[i].labels),
                single.fit_mse, 1e-12);
  }
}

// Instances of scalar features with regret sum_n c(x_n) r_n^2.
struct PlantedFbp {
  std::vector<PtoInstance> instances;
  SampleMap samples;
};

PlantedFbp planted_fbp(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  std::normal_distribution<double> normal;
  PlantedFbp out;
  for (std::uint64_t i = 0; i < count; ++i) {
    PtoInstance inst;
    inst.id = i;
    inst.labels = Vector::Zero(8);
    for (int n = 0; n < 8; ++n) inst.features.push_back(Vector::Constant(1, ux(rng)));
    for (std::size_t s = 0; s < 24; ++s) {
      CandidateSample c;
      c.instance_id = i;
      c.sample_index = s;
      c.prediction.resize(8);
      c.regret = 0.0;
      for (Eigen::Index n = 0; n < 8; ++n) {
        c.prediction(n) = normal(rng);
        const double x = inst.features[static_cast<std::size_t>(n)](0);
        c.regret += (1.0 + std::abs(x)) * c.prediction(n) * c.prediction(n);
      }
      out.samples[i].push_back(c);
    }
    out.instances.push_back(std::move(inst));
  }
  return out;
}

TEST(FitFbpTest, RecoversPlantedWeightFunction) {
  const PlantedFbp data = planted_fbp(60, 1);
  std::vector<const PtoInstance*> train;
  std::vector<const PtoInstance*> val;
  for (const auto& inst : data.instances) {
    (inst.id < 50 ? train : val).push_back(&inst);
  }
  FbpConfig config;
  config.family = LossFamily::kWeightedMse;
  config.hidden = 32;
  config.layers = 3;
  config.seed = 2;
  TrainConfig tc;
  tc.learning_rate = 3e-3;
  tc.batch_size = 4;
  tc.epochs = 200;
  tc.patience = 30;
  const FbpFit fit = fit_fbp(data.samples, train, val, config, tc);
  PtoInstance probe;
  probe.labels = Vector::Zero(21);
  for (int i = 0; i <= 20; ++i) {
    probe.features.push_back(Vector::Constant(1, -1.0 + 0.1 * i));
  }
  const Vector w = induced_params(fit.network, probe).weights();
  for (int i = 0; i <= 20; ++i) {
    EXPECT_NEAR(w(i), 1.0 + std::abs(-1.0 + 0.1 * i), 0.1) << "x index " << i;
  }
}

FbpNetwork random_network(LossFamily family, std::size_t width,
                          std::uint64_t seed) {
  FbpNetwork net;
  net.family = family;
  const std::size_t in = fbp_pairwise(family) ? 2 * width + 1 : width;
  net.net = Mlp({in, 6, fbp_heads(family)});
  net.net.init_he_uniform(seed);
  net.feature_mean = Vector::Zero(static_cast<Eigen::Index>(width));
  net.feature_scale = Vector::Ones(static_cast<Eigen::Index>(width));
  return net;
}

TEST(InducedParamsTest, WeightSharingAcrossInstances) {
  std::mt19937_64 rng(8);
  for (auto family : kFbpFamilies) {
    const FbpNetwork net = random_network(family, 2, 3);
    PtoInstance a;
    PtoInstance b;
    a.labels = Vector::Zero(3);
    b.labels = Vector::Zero(3);
    const Vector shared = normal_vector(rng, 2);
    a.features = {normal_vector(rng, 2), shared, normal_vector(rng, 2)};
    b.features = {shared, normal_vector(rng, 2), normal_vector(rng, 2)};
    const LossParams pa = induced_params(net, a);
    const LossParams pb = induced_params(net, b);
    if (family == LossFamily::kWeightedMse ||
        family == LossFamily::kDirectedWeightedMse) {
      EXPECT_EQ(pa.weights()(1), pb.weights()(0));
    } else {
      // Diagonal factor entry for the shared feature.
      EXPECT_EQ(pa.factor(0)(1, 1), pb.factor(0)(0, 0));
    }
  }
}

TEST(InducedParamsTest, PermutationEquivariant) {
  std::mt19937_64 rng(9);
  const FbpNetwork net = random_network(LossFamily::kDirectedWeightedMse, 3, 4);
  PtoInstance a;
  a.labels = Vector::Zero(4);
  for (int i = 0; i < 4; ++i) a.features.push_back(normal_vector(rng, 3));
  PtoInstance b = a;
  std::swap(b.features[0], b.features[3]);
  const Vector wa = induced_params(net, a).weights();
  const Vector wb = induced_params(net, b).weights();
  EXPECT_EQ(wa(0), wb(3));
  EXPECT_EQ(wa(1), wb(1));
}

TEST(InducedParamsTest, ConstantNetworkGivesUniformWeights) {
  std::mt19937_64 rng(10);
  FbpNetwork net = random_network(LossFamily::kWeightedMse, 2, 5);
  net.net.weight(1).setZero();
  net.net.bias(1).setConstant(0.7);
  PtoInstance a;
  a.labels = Vector::Zero(5);
  for (int i = 0; i < 5; ++i) a.features.push_back(normal_vector(rng, 2));
  const Vector w = induced_params(net, a).weights();
  EXPECT_NEAR((w - Vector::Constant(5, w(0))).norm(), 0.0, 0.0);
  EXPECT_NEAR(w(0), net.w_min + softplus(0.7), 1e-15);
}

TEST(InducedParamsTest, QuadraticPairsAtFullSize) {
  std::mt19937_64 rng(11);
  const FbpNetwork net = random_network(LossFamily::kQuadratic, 1, 6);
  PtoInstance a;
  a.labels = Vector::Zero(50);
  for (int i = 0; i < 50; ++i) a.features.push_back(normal_vector(rng, 1));
  EXPECT_EQ(fbp_inputs(net, a).cols(), 2500);
  const LossParams p = induced_params(net, a);
  EXPECT_EQ(p.factor(0).rows(), 50);
  EXPECT_EQ(p.factor(0).cols(), 50);
}

TEST(InducedParamsTest, FeatureWidthMismatch) {
  const FbpNetwork net = random_network(LossFamily::kWeightedMse, 2, 1);
  PtoInstance a;
  a.labels = Vector::Zero(2);
  a.features = {Vector::Zero(3), Vector::Zero(3)};
  EXPECT_THROW(induced_params(net, a), InputError);
  EXPECT_THROW(fbp_heads(LossFamily::kLz), CapabilityError);
}

TEST(FitFbpTest, SingleInstanceMatchesLodl) {
  // Per-instance weights vary, so the network has to use its input.
  std::mt19937_64 rng(12);
  PtoInstance inst;
  inst.id = 0;
  inst.labels = Vector::Zero(4);
  const Vector c = vec({0.5, 1.0, 2.0, 3.0});
  for (int n = 0; n < 4; ++n) inst.features.push_back(Vector::Constant(1, n));
  SampleMap map;
  for (std::size_t s = 0; s < 32; ++s) {
    CandidateSample cs;
    cs.instance_id = 0;
    cs.sample_index = s;
    cs.prediction = normal_vector(rng, 4);
    cs.regret = c.dot(cs.prediction.cwiseAbs2()) + 0.1 * std::abs(cs.prediction(0));
    map[0].push_back(cs);
  }
  LossFitConfig lc;
  lc.family = LossFamily::kWeightedMse;
  lc.steps = 2000;
  const LossFit lodl = fit_lodl(map[0], inst.labels, lc);
  FbpConfig fc;
  fc.family = LossFamily::kWeightedMse;
  fc.hidden = 16;
  fc.layers = 3;
  TrainConfig tc;
  tc.learning_rate = 0.01;
  tc.epochs = 2000;
  tc.batch_size = 1;
  const std::vector<const PtoInstance*> train = {&inst};
  const FbpFit fbp = fit_fbp(map, train, {}, fc, tc);
  EXPECT_LE(fbp.train_fit_mse, lodl.fit_mse * 1.1 + 1e-4);
}

TEST(OptimalWmseTest, Examples) {
  const std::vector<double> y = {0.0, 1.0};
  const std::vector<double> p = {0.5, 0.5};
  EXPECT_NEAR(optimal_wmse_prediction(y, p, std::vector<double>{0.385, 0.582}),
              0.602, 1e-3);
  EXPECT_DOUBLE_EQ(optimal_wmse_prediction(y, p, std::vector<double>{2.0, 2.0}),
                   0.5);
  EXPECT_DOUBLE_EQ(optimal_wmse_prediction(std::vector<double>{0.3},
                                           std::vector<double>{1.0},
                                           std::vector<double>{4.0}),
                   0.3);
  EXPECT_THROW(optimal_wmse_prediction(y, std::vector<double>{0.5, 0.4},
                                       std::vector<double>{1, 1}),
               InputError);
  EXPECT_THROW(optimal_wmse_prediction(y, p, std::vector<double>{1, -1}),
               InputError);
}

TEST(FisherConsistencyTest, SharedWeightMinimizerIsConditionalMean) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double y0 = 4 * u(rng) - 2;
    const double y1 = 4 * u(rng) - 2;
    const double p = 0.05 + 0.9 * u(rng);
    const double w = 0.01 + 5 * u(rng);  // shared by both outcomes
    const auto risk = [&](double yhat) {
      return p * w * (yhat - y0) * (yhat - y0) +
             (1 - p) * w * (yhat - y1) * (yhat - y1);
    };
    EXPECT_NEAR(oracle::golden_section_min(risk, -3, 3), p * y0 + (1 - p) * y1,
                1e-6);
  }
}

TEST(FisherConsistencyTest, ClosedFormMatchesNumericMinimizer) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> y = {4 * u(rng) - 2, 4 * u(rng) - 2};
    const double p0 = 0.05 + 0.9 * u(rng);
    const std::vector<double> p = {p0, 1 - p0};
    const std::vector<double> w = {0.01 + 5 * u(rng), 0.01 + 5 * u(rng)};
    const auto risk = [&](double yhat) {
      return p[0] * w[0] * (yhat - y[0]) * (yhat - y[0]) +
             p[1] * w[1] * (yhat - y[1]) * (yhat - y[1]);
    };
    EXPECT_NEAR(optimal_wmse_prediction(y, p, w),
                oracle::golden_section_min(risk, -3, 3), 1e-6);
  }
}

TEST(FisherConsistencyTest, ReportedWeightsFlipDecision) {
  const CounterexampleOutcome o =
      counterexample_outcome(kReportedWeightBlue, kReportedWeightOrange);
  EXPECT_NEAR(o.prediction_a, 0.602, 1e-3);
  EXPECT_GT(o.prediction_a, kCounterexampleB);
  EXPECT_EQ(o.chosen, Individual::kA);
  EXPECT_FALSE(o.consistent);
  const CounterexampleOutcome equal = counterexample_outcome(0.4, 0.4);
  EXPECT_EQ(equal.chosen, Individual::kB);
  EXPECT_TRUE(equal.consistent);
}

}  // namespace
}  // namespace egl
