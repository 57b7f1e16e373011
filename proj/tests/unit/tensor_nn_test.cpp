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

#include "egl/tensor_nn.hpp"

#include <cmath>
#include <filesystem>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace egl {
namespace {

// Straight-line evaluator over the raw parameter layout: per layer a
// row-major weight block followed by the bias.
Vector reference_forward(const std::vector<std::size_t>& widths,
                         std::span<const double> params, const Vector& x) {
  std::vector<double> act(x.data(), x.data() + x.size());
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    std::vector<double> next(out, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < in; ++c) s += params[at + r * in + c] * act[c];
      s += params[at + out * in + r];
      next[r] = (l + 2 < widths.size()) ? std::max(s, 0.0) : s;
    }
    at += out * in + out;
    act = std::move(next);
  }
  return Eigen::Map<const Vector>(act.data(), static_cast<Eigen::Index>(act.size()));
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> normal;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = normal(rng);
  }
  return m;
}

TEST(MlpTest, ZeroModelGivesZero) {
  Mlp model({3, 4, 2});
  EXPECT_EQ(model.forward(Vector::Ones(3)), Vector::Zero(2));
}

TEST(MlpTest, LinearModel) {
  Mlp model({1, 1});
  model.weight(0)(0, 0) = 2.5;
  model.bias(0)(0) = -1.0;
  EXPECT_DOUBLE_EQ(model.forward(Vector::Constant(1, 3.0))(0), 6.5);
}

TEST(MlpTest, MatchesReferenceEvaluator) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const std::vector<std::size_t> widths = {4, 7, 5, 3};
    Mlp model(widths);
    model.init_he_uniform(static_cast<std::uint64_t>(t));
    const Matrix x = random_matrix(rng, 4, 6);
    const Matrix out = model.forward_batch(x);
    for (Eigen::Index c = 0; c < 6; ++c) {
      const Vector ref = reference_forward(widths, model.params(), x.col(c));
      EXPECT_LT((out.col(c) - ref).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(MlpTest, ShapeMismatchThrows) {
  Mlp model({3, 2});
  EXPECT_THROW(model.forward(Vector::Ones(4)), InputError);
}

TEST(MlpTest, HeInitRangeAndDeterminism) {
  Mlp a({6, 10, 1});
  Mlp b({6, 10, 1});
  a.init_he_uniform(5);
  b.init_he_uniform(5);
  EXPECT_TRUE(std::equal(a.params().begin(), a.params().end(),
                         b.params().begin()));
  EXPECT_LE(a.weight(0).cwiseAbs().maxCoeff(), std::sqrt(6.0 / 6.0));
  EXPECT_LE(a.bias(0).cwiseAbs().maxCoeff(), 1.0 / std::sqrt(6.0));
}

// Constant loss regardless of the outputs.
class ConstantObjective final : public ExampleObjective {
 public:
  explicit ConstantObjective(Matrix x) : x_(std::move(x)) {}
  std::size_t size() const override { return 1; }
  const Matrix& inputs(std::size_t) const override { return x_; }
  double evaluate(std::size_t, const Vector& outputs,
                  Vector* grad) const override {
    if (grad != nullptr) *grad = Vector::Zero(outputs.size());
    return 4.0;
  }

 private:
  Matrix x_;
};

TEST(GradTest, ConstantLossHasZeroGradient) {
  Mlp model({2, 3, 1});
  model.init_he_uniform(1);
  const ConstantObjective obj(Matrix::Ones(2, 3));
  const std::vector<std::size_t> idx = {0};
  const GradientResult g = grad(model, obj, idx);
  EXPECT_DOUBLE_EQ(g.loss, 4.0);
  for (double v : g.grad) EXPECT_EQ(v, 0.0);
}

TEST(GradTest, ScalarLinearClosedForm) {
  Mlp model({1, 1});
  model.weight(0)(0, 0) = 0.7;
  model.bias(0)(0) = -0.2;
  const double x = 1.3;
  const double y = 2.0;
  const MseObjective obj({Matrix::Constant(1, 1, x)}, {Vector::Constant(1, y)});
  const std::vector<std::size_t> idx = {0};
  const GradientResult g = grad(model, obj, idx);
  const double e = 0.7 * x - 0.2 - y;
  EXPECT_NEAR(g.grad[0], 2 * e * x, 1e-12);
  EXPECT_NEAR(g.grad[1], 2 * e, 1e-12);
}

TEST(GradTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  const std::vector<std::vector<std::size_t>> shapes = {
      {1, 1}, {3, 1}, {2, 5, 1}, {4, 6, 6, 2}};
  for (int t = 0; t < 50; ++t) {
    const auto& widths = shapes[static_cast<std::size_t>(t) % shapes.size()];
    Mlp model(widths);
    model.init_he_uniform(static_cast<std::uint64_t>(100 + t));
    const auto in = static_cast<Eigen::Index>(widths.front());
    const auto out = static_cast<Eigen::Index>(widths.back());
    std::vector<Matrix> xs = {random_matrix(rng, in, 4), random_matrix(rng, in, 4)};
    std::vector<Vector> ys = {random_matrix(rng, 4 * out, 1).col(0),
                              random_matrix(rng, 4 * out, 1).col(0)};
    const MseObjective obj(xs, ys);
    const std::vector<std::size_t> idx = {0, 1};
    const GradientResult g = grad(model, obj, idx, ExecutionPolicy::kSerial);
    Vector theta = Eigen::Map<const Vector>(
        model.params().data(), static_cast<Eigen::Index>(model.num_params()));
    const Vector fd = oracle::central_difference(
        [&](const Vector& p) {
          Mlp copy = model;
          std::copy(p.data(), p.data() + p.size(), copy.params().begin());
          return grad(copy, obj, idx, ExecutionPolicy::kSerial).loss;
        },
        theta);
    const Vector rev = Eigen::Map<const Vector>(g.grad.data(), fd.size());
    EXPECT_LT(oracle::relative_error(rev, fd, 1e-4), 1e-4) << "draw " << t;
  }
}

TEST(GradTest, ParallelMatchesSerialExactly) {
  std::mt19937_64 rng(3);
  Mlp model({2, 8, 1});
  model.init_he_uniform(3);
  std::vector<Matrix> xs;
  std::vector<Vector> ys;
  for (int i = 0; i < 37; ++i) {
    xs.push_back(random_matrix(rng, 2, 5));
    ys.push_back(random_matrix(rng, 5, 1).col(0));
  }
  const MseObjective obj(xs, ys);
  std::vector<std::size_t> idx(37);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const GradientResult s = grad(model, obj, idx, ExecutionPolicy::kSerial);
  const GradientResult p = grad(model, obj, idx, ExecutionPolicy::kParallel);
  EXPECT_EQ(s.loss, p.loss);
  EXPECT_EQ(s.grad, p.grad);
}

TEST(CyclicLrTest, TriangleWave) {
  EXPECT_DOUBLE_EQ(cyclic_lr(0, 0.1, 1.0, 10), 0.1);
  EXPECT_DOUBLE_EQ(cyclic_lr(5, 0.1, 1.0, 10), 1.0);
  EXPECT_DOUBLE_EQ(cyclic_lr(10, 0.1, 1.0, 10), 0.1);
  EXPECT_NEAR(cyclic_lr(2, 0.0, 1.0, 8), 0.5, 1e-15);
  EXPECT_NEAR(cyclic_lr(6, 0.0, 1.0, 8), 0.5, 1e-15);
  EXPECT_THROW(cyclic_lr(1, 1.0, 0.5, 10), InputError);
  EXPECT_THROW(cyclic_lr(1, 0.1, 0.5, 1), InputError);
}

MseObjective line_data(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Matrix> xs;
  std::vector<Vector> ys;
  for (std::size_t i = 0; i < n; ++i) {
    Matrix x(1, 4);
    Vector y(4);
    for (int c = 0; c < 4; ++c) {
      x(0, c) = u(rng);
      y(c) = 3.0 * x(0, c) + 1.0;
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  return MseObjective(xs, ys);
}

TEST(TrainTest, RecoversLine) {
  const MseObjective obj = line_data(1, 64);
  Mlp model({1, 1});
  model.init_he_uniform(2);
  TrainConfig config;
  config.learning_rate = 0.05;
  config.epochs = 300;
  train(model, obj, config);
  EXPECT_NEAR(model.weight(0)(0, 0), 3.0, 1e-2);
  EXPECT_NEAR(model.bias(0)(0), 1.0, 1e-2);
}

TEST(TrainTest, ZeroLearningRateKeepsParameters) {
  const MseObjective obj = line_data(1, 16);
  Mlp model({1, 4, 1});
  model.init_he_uniform(2);
  const std::vector<double> before(model.params().begin(), model.params().end());
  for (auto kind : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
    TrainConfig config;
    config.learning_rate = 0.0;
    config.optimizer = kind;
    config.epochs = 3;
    const TrainHistory h = train(model, obj, config);
    EXPECT_GT(h.updates, 0u);
    EXPECT_TRUE(std::equal(before.begin(), before.end(), model.params().begin()));
  }
}

TEST(TrainTest, PatienceZeroStopsAtFirstNonImprovement) {
  const MseObjective obj = line_data(1, 16);
  Mlp model({1, 1});
  model.init_he_uniform(2);
  TrainConfig config;
  config.learning_rate = 0.01;
  config.epochs = 50;
  config.patience = 0;
  int calls = 0;
  // Improves once, then rises forever.
  const TrainHistory h = train(model, obj, config, [&](const Mlp&) {
    ++calls;
    return calls == 2 ? 0.5 : 1.0 + calls;
  });
  EXPECT_TRUE(h.early_stopped);
  EXPECT_EQ(h.best_epoch, 1u);
  EXPECT_EQ(h.validation_loss.size(), 3u);
  EXPECT_EQ(h.train_loss.size(), 3u);
}

TEST(TrainTest, EarlyStoppingRestoresBestParameters) {
  const MseObjective obj = line_data(1, 16);
  Mlp model({1, 1});
  model.init_he_uniform(2);
  const std::vector<double> init(model.params().begin(), model.params().end());
  TrainConfig config;
  config.learning_rate = 0.05;
  config.epochs = 5;
  config.patience = 10;
  // Best is the untrained model.
  train(model, obj, config, [&](const Mlp& m) {
    return std::equal(init.begin(), init.end(), m.params().begin()) ? 0.0 : 1.0;
  });
  EXPECT_TRUE(std::equal(init.begin(), init.end(), model.params().begin()));
}

TEST(TrainTest, MaxUpdatesCap) {
  const MseObjective obj = line_data(1, 32);
  Mlp model({1, 1});
  TrainConfig config;
  config.batch_size = 4;
  config.max_updates = 11;
  config.epochs = 10;
  EXPECT_EQ(train(model, obj, config).updates, 11u);
}

TEST(TrainTest, SeedDeterminism) {
  const MseObjective obj = line_data(4, 40);
  auto run = [&] {
    Mlp model({1, 8, 1});
    model.init_he_uniform(9);
    TrainConfig config;
    config.epochs = 5;
    config.seed = 17;
    train(model, obj, config);
    return std::vector<double>(model.params().begin(), model.params().end());
  };
  EXPECT_EQ(run(), run());
}

TEST(TrainTest, LossNonIncreasingWithSmallStep) {
  const MseObjective obj = line_data(5, 32);
  Mlp model({1, 1});
  model.init_he_uniform(3);
  TrainConfig config;
  config.optimizer = OptimizerKind::kSgd;
  config.learning_rate = 1e-3;
  config.batch_size = 32;
  config.epochs = 10;
  const TrainHistory h = train(model, obj, config);
  for (std::size_t e = 1; e < h.train_loss.size(); ++e) {
    EXPECT_LE(h.train_loss[e], h.train_loss[e - 1]);
  }
}

class NanObjective final : public ExampleObjective {
 public:
  NanObjective() : x_(Matrix::Ones(1, 1)) {}
  std::size_t size() const override { return 1; }
  const Matrix& inputs(std::size_t) const override { return x_; }
  double evaluate(std::size_t, const Vector& outputs,
                  Vector* grad) const override {
    if (grad != nullptr) *grad = Vector::Zero(outputs.size());
    return std::nan("");
  }

 private:
  Matrix x_;
};

TEST(TrainTest, NanLossIsTrainingError) {
  Mlp model({1, 1});
  TrainConfig config;
  try {
    train(model, NanObjective(), config);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.step(), 0u);
  }
}

TEST(TrainTest, ConfigValidation) {
  TrainConfig config;
  config.learning_rate = -1.0;
  EXPECT_THROW(config.validate(), ConfigError);
  config.learning_rate = 0.1;
  config.batch_size = 0;
  EXPECT_THROW(config.validate(), ConfigError);
  config.batch_size = 1;
  config.schedule = LrSchedule::kCyclic;
  config.max_learning_rate = 0.01;
  EXPECT_THROW(config.validate(), ConfigError);
}

TEST(CheckpointTest, RoundTrip) {
  Mlp model({3, 5, 2});
  model.init_he_uniform(12);
  const auto path = std::filesystem::temp_directory_path() / "egl_ckpt_test.bin";
  save_checkpoint(model, path);
  const Mlp loaded = load_checkpoint(path);
  EXPECT_EQ(loaded.widths(), model.widths());
  EXPECT_TRUE(std::equal(model.params().begin(), model.params().end(),
                         loaded.params().begin()));
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), InputError);
}

}  // namespace
}  // namespace egl
