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

// Dense feedforward networks with reverse-mode gradients, first-order
// optimizers, learning-rate schedules and a generic training loop.

#ifndef EGL_TENSOR_NN_HPP_
#define EGL_TENSOR_NN_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "egl/core.hpp"

namespace egl {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Activations cached by the forward pass for backward().
struct Tape {
  std::vector<Matrix> activations;  // activations[0] is the input batch
  std::vector<Matrix> pre_activations;
};

// Fully connected network: ReLU between layers, identity on the output.
// Parameters live in one flat buffer, per layer a row-major (out x in)
// weight block followed by the bias.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<std::size_t> widths);

  // Layer widths {in, hidden..., out}; {1, 1} is the linear model mx + c.
  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t num_layers() const { return widths_.size() - 1; }
  std::size_t input_width() const { return widths_.front(); }
  std::size_t output_width() const { return widths_.back(); }
  std::size_t num_params() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  Eigen::Map<RowMatrix> weight(std::size_t layer);
  Eigen::Map<const RowMatrix> weight(std::size_t layer) const;
  Eigen::Map<Vector> bias(std::size_t layer);
  Eigen::Map<const Vector> bias(std::size_t layer) const;

  // Uniform He fan-in init: weights in +-sqrt(6/fan_in), biases in
  // +-1/sqrt(fan_in).
  void init_he_uniform(std::uint64_t seed);

  Vector forward(const Vector& x) const;
  // Columns of `inputs` are samples.
  Matrix forward_batch(const Matrix& inputs) const;
  Matrix forward_batch(const Matrix& inputs, Tape& tape) const;
  // Accumulates d(loss)/d(params) into `param_grad` given d(loss)/d(outputs).
  void backward(const Tape& tape, const Matrix& output_grad,
                std::span<double> param_grad) const;
  // Same, and also returns d(loss)/d(inputs).
  Matrix backward_with_input_grad(const Tape& tape, const Matrix& output_grad,
                                  std::span<double> param_grad) const;

 private:
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> offsets_;  // start of each layer's weight block
  AlignedBuffer params_;
};

// A set of training examples, each a batch of input columns whose stacked
// outputs (column-major, i.e. grouped per input column) are scored jointly.
class ExampleObjective {
 public:
  virtual ~ExampleObjective() = default;
  virtual std::size_t size() const = 0;
  virtual const Matrix& inputs(std::size_t example) const = 0;
  // Loss of one example; writes d(loss)/d(outputs) when `grad` is non-null.
  virtual double evaluate(std::size_t example, const Vector& outputs,
                          Vector* grad) const = 0;
};

// Mean squared error against fixed targets (one vector per example).
class MseObjective final : public ExampleObjective {
 public:
  MseObjective(std::vector<Matrix> inputs, std::vector<Vector> targets);
  std::size_t size() const override { return inputs_.size(); }
  const Matrix& inputs(std::size_t example) const override {
    return inputs_[example];
  }
  double evaluate(std::size_t example, const Vector& outputs,
                  Vector* grad) const override;

 private:
  std::vector<Matrix> inputs_;
  std::vector<Vector> targets_;
};

// Flattened model outputs for one example.
Vector predict_example(const Mlp& model, const Matrix& inputs);

// Loss and parameter gradient of a single example, accumulated into
// `param_grad` scaled by `scale`.
double example_gradient(const Mlp& model, const ExampleObjective& objective,
                        std::size_t example, double scale,
                        std::span<double> param_grad);

// Mean loss over `examples` and its exact gradient.
struct GradientResult {
  double loss = 0.0;
  std::vector<double> grad;
};

GradientResult grad(const Mlp& model, const ExampleObjective& objective,
                    std::span<const std::size_t> examples,
                    ExecutionPolicy policy = ExecutionPolicy::kParallel);

// Triangular cyclic learning rate: base at the start and end of each cycle,
// max_lr at the midpoint.
double cyclic_lr(std::size_t step, double base_lr, double max_lr,
                 std::size_t cycle_len);

enum class OptimizerKind { kSgd, kAdam };
enum class LrSchedule { kConstant, kCyclic };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(std::string_view name);
std::string_view to_string(LrSchedule schedule);
LrSchedule schedule_from_string(std::string_view name);

struct TrainConfig {
  double learning_rate = 1e-3;
  LrSchedule schedule = LrSchedule::kConstant;
  double max_learning_rate = 1e-2;  // cyclic peak
  std::size_t cycle_length = 200;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::size_t batch_size = 8;
  std::size_t max_updates = 0;  // 0: no cap
  std::size_t epochs = 100;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  ExecutionPolicy policy = ExecutionPolicy::kParallel;

  void validate() const;
  double learning_rate_at(std::size_t step) const;
};

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, std::size_t num_params);
  void step(std::span<double> params, std::span<const double> grad, double lr);

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;
  OptimizerKind kind_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

struct TrainHistory {
  // Index 0 holds the losses before the first update.
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::size_t updates = 0;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
};

// Returns the validation loss of a model (lower is better).
using ValidationFn = std::function<double(const Mlp&)>;

// Minibatch training with early stopping on `validation` (when given); the
// parameters of the best validation epoch are restored. Throws TrainingError
// on a non-finite loss.
TrainHistory train(Mlp& model, const ExampleObjective& objective,
                   const TrainConfig& config,
                   const ValidationFn& validation = {});

// Binary checkpoint: magic "EGLMLP\0\1", u64 layer count + 1, u64 widths,
// row-major f64 parameters, little endian.
void save_checkpoint(const Mlp& model, const std::filesystem::path& path);
Mlp load_checkpoint(const std::filesystem::path& path);

}  // namespace egl

#endif  // EGL_TENSOR_NN_HPP_
