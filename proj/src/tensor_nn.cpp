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

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "egl/kernels.hpp"

namespace egl {
namespace {

constexpr std::array<char, 8> kCheckpointMagic = {'E', 'G', 'L', 'M',
                                                  'L', 'P', '\0', '\1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

}  // namespace

Mlp::Mlp(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw InputError("mlp: need at least two widths");
  for (auto w : widths_) {
    if (w == 0) throw InputError("mlp: layer widths must be positive");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    offsets_.push_back(total);
    total += widths_[l + 1] * widths_[l] + widths_[l + 1];
  }
  params_.assign(total, 0.0);
}

Eigen::Map<RowMatrix> Mlp::weight(std::size_t layer) {
  return {params_.data() + offsets_[layer],
          static_cast<Eigen::Index>(widths_[layer + 1]),
          static_cast<Eigen::Index>(widths_[layer])};
}

Eigen::Map<const RowMatrix> Mlp::weight(std::size_t layer) const {
  return {params_.data() + offsets_[layer],
          static_cast<Eigen::Index>(widths_[layer + 1]),
          static_cast<Eigen::Index>(widths_[layer])};
}

Eigen::Map<Vector> Mlp::bias(std::size_t layer) {
  return {params_.data() + offsets_[layer] + widths_[layer + 1] * widths_[layer],
          static_cast<Eigen::Index>(widths_[layer + 1])};
}

Eigen::Map<const Vector> Mlp::bias(std::size_t layer) const {
  return {params_.data() + offsets_[layer] + widths_[layer + 1] * widths_[layer],
          static_cast<Eigen::Index>(widths_[layer + 1])};
}

void Mlp::init_he_uniform(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const double fan_in = static_cast<double>(widths_[l]);
    std::uniform_real_distribution<double> w(-std::sqrt(6.0 / fan_in),
                                             std::sqrt(6.0 / fan_in));
    std::uniform_real_distribution<double> b(-1.0 / std::sqrt(fan_in),
                                             1.0 / std::sqrt(fan_in));
    auto wm = weight(l);
    for (Eigen::Index r = 0; r < wm.rows(); ++r) {
      for (Eigen::Index c = 0; c < wm.cols(); ++c) wm(r, c) = w(rng);
    }
    auto bv = bias(l);
    for (Eigen::Index r = 0; r < bv.size(); ++r) bv(r) = b(rng);
  }
}

Vector Mlp::forward(const Vector& x) const {
  check_dimension(x.size(), input_width(), "mlp input");
  return forward_batch(Matrix(x)).col(0);
}

Matrix Mlp::forward_batch(const Matrix& inputs) const {
  Tape tape;
  return forward_batch(inputs, tape);
}

Matrix Mlp::forward_batch(const Matrix& inputs, Tape& tape) const {
  check_dimension(inputs.rows(), input_width(), "mlp input");
  tape.activations.assign(1, inputs);
  tape.pre_activations.clear();
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Matrix z = weight(l) * tape.activations.back();
    z.colwise() += bias(l);
    tape.pre_activations.push_back(z);
    if (l + 1 < num_layers()) {
      tape.activations.push_back(z.cwiseMax(0.0));
    } else {
      tape.activations.push_back(std::move(z));
    }
  }
  return tape.activations.back();
}

Matrix Mlp::backward_with_input_grad(const Tape& tape,
                                     const Matrix& output_grad,
                                     std::span<double> param_grad) const {
  check_dimension(param_grad.size(), num_params(), "mlp gradient buffer");
  Matrix delta = output_grad;
  for (std::size_t l = num_layers(); l-- > 0;) {
    const Matrix& input = tape.activations[l];
    Eigen::Map<RowMatrix> gw(param_grad.data() + offsets_[l],
                             static_cast<Eigen::Index>(widths_[l + 1]),
                             static_cast<Eigen::Index>(widths_[l]));
    Eigen::Map<Vector> gb(
        param_grad.data() + offsets_[l] + widths_[l + 1] * widths_[l],
        static_cast<Eigen::Index>(widths_[l + 1]));
    gw.noalias() += delta * input.transpose();
    gb += delta.rowwise().sum();
    Matrix upstream = weight(l).transpose() * delta;
    if (l > 0) {
      // ReLU gate; the derivative at exactly zero is taken as 0.
      upstream = upstream.cwiseProduct(
          (tape.pre_activations[l - 1].array() > 0.0).cast<double>().matrix());
    }
    delta = std::move(upstream);
  }
  return delta;
}

void Mlp::backward(const Tape& tape, const Matrix& output_grad,
                   std::span<double> param_grad) const {
  backward_with_input_grad(tape, output_grad, param_grad);
}

MseObjective::MseObjective(std::vector<Matrix> inputs,
                           std::vector<Vector> targets)
    : inputs_(std::move(inputs)), targets_(std::move(targets)) {
  if (inputs_.size() != targets_.size()) {
    throw InputError("mse: inputs and targets differ in count");
  }
}

double MseObjective::evaluate(std::size_t example, const Vector& outputs,
                              Vector* grad_out) const {
  const Vector& target = targets_[example];
  check_dimension(outputs.size(), target.size(), "mse outputs");
  const Vector diff = outputs - target;
  const double n = static_cast<double>(diff.size());
  if (grad_out != nullptr) *grad_out = (2.0 / n) * diff;
  return diff.squaredNorm() / n;
}

Vector predict_example(const Mlp& model, const Matrix& inputs) {
  const Matrix out = model.forward_batch(inputs);
  return Eigen::Map<const Vector>(out.data(), out.size());
}

double example_gradient(const Mlp& model, const ExampleObjective& objective,
                        std::size_t example, double scale,
                        std::span<double> param_grad) {
  Tape tape;
  const Matrix out = model.forward_batch(objective.inputs(example), tape);
  const Vector flat = Eigen::Map<const Vector>(out.data(), out.size());
  Vector g;
  const double loss = objective.evaluate(example, flat, &g);
  const Matrix g_mat =
      Eigen::Map<const Matrix>(g.data(), out.rows(), out.cols()) * scale;
  model.backward(tape, g_mat, param_grad);
  return loss;
}

GradientResult grad(const Mlp& model, const ExampleObjective& objective,
                    std::span<const std::size_t> examples,
                    ExecutionPolicy policy) {
  return kernels::batch_gradient(model, objective, examples, policy);
}

double cyclic_lr(std::size_t step, double base_lr, double max_lr,
                 std::size_t cycle_len) {
  if (cycle_len < 2) throw InputError("cyclic_lr: cycle_len must be >= 2");
  if (max_lr < base_lr) throw InputError("cyclic_lr: max_lr < base_lr");
  const double pos = static_cast<double>(step % cycle_len);
  const double half = static_cast<double>(cycle_len) / 2.0;
  const double frac =
      pos <= half ? pos / half : (static_cast<double>(cycle_len) - pos) / half;
  return base_lr + (max_lr - base_lr) * frac;
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind optimizer_from_string(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(LrSchedule schedule) {
  return schedule == LrSchedule::kConstant ? "constant" : "cyclic";
}

LrSchedule schedule_from_string(std::string_view name) {
  if (name == "constant") return LrSchedule::kConstant;
  if (name == "cyclic") return LrSchedule::kCyclic;
  throw ConfigError("unknown schedule '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (schedule == LrSchedule::kCyclic) {
    if (cycle_length < 2) throw ConfigError("cycle length must be >= 2");
    if (max_learning_rate < learning_rate) {
      throw ConfigError("cyclic max learning rate below base rate");
    }
  }
}

double TrainConfig::learning_rate_at(std::size_t step) const {
  if (schedule == LrSchedule::kCyclic) {
    return cyclic_lr(step, learning_rate, max_learning_rate, cycle_length);
  }
  return learning_rate;
}

Optimizer::Optimizer(OptimizerKind kind, std::size_t num_params)
    : kind_(kind) {
  if (kind_ == OptimizerKind::kAdam) {
    m_.assign(num_params, 0.0);
    v_.assign(num_params, 0.0);
  }
}

void Optimizer::step(std::span<double> params, std::span<const double> g,
                     double lr) {
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * g[i];
    return;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * g[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * g[i] * g[i];
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kEpsilon);
  }
}

TrainHistory train(Mlp& model, const ExampleObjective& objective,
                   const TrainConfig& config, const ValidationFn& validation) {
  config.validate();
  TrainHistory history;
  const std::size_t n = objective.size();
  if (n == 0) throw InputError("train: no training examples");

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto full_loss = [&] {
    const double loss = kernels::mean_loss(model, objective, all, config.policy);
    if (!std::isfinite(loss)) {
      throw TrainingError("non-finite training loss", history.updates);
    }
    return loss;
  };

  history.train_loss.push_back(full_loss());
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_params(model.params().begin(), model.params().end());
  if (validation) {
    best = validation(model);
    history.validation_loss.push_back(best);
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order = all;
  Optimizer optimizer(config.optimizer, model.num_params());
  std::size_t stale = 0;
  bool budget_hit = false;

  for (std::size_t epoch = 1; epoch <= config.epochs && !budget_hit; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      if (config.max_updates != 0 && history.updates >= config.max_updates) {
        budget_hit = true;
        break;
      }
      const std::size_t end = std::min(n, start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start,
                                               end - start);
      const GradientResult g = grad(model, objective, batch, config.policy);
      if (!std::isfinite(g.loss)) {
        throw TrainingError("non-finite training loss", history.updates);
      }
      optimizer.step(model.params(), g.grad,
                     config.learning_rate_at(history.updates));
      ++history.updates;
    }
    history.train_loss.push_back(full_loss());
    if (!validation) {
      history.best_epoch = epoch;
      continue;
    }
    const double val = validation(model);
    history.validation_loss.push_back(val);
    if (val < best) {
      best = val;
      history.best_epoch = epoch;
      std::copy(model.params().begin(), model.params().end(),
                best_params.begin());
      stale = 0;
    } else if (++stale > config.patience) {
      history.early_stopped = true;
      break;
    }
  }
  if (validation) {
    std::copy(best_params.begin(), best_params.end(), model.params().begin());
  }
  return history;
}

void save_checkpoint(const Mlp& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  const std::uint64_t count = model.widths().size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (auto w : model.widths()) {
    const std::uint64_t w64 = w;
    out.write(reinterpret_cast<const char*>(&w64), sizeof(w64));
  }
  out.write(reinterpret_cast<const char*>(model.params().data()),
            static_cast<std::streamsize>(model.num_params() * sizeof(double)));
}

Mlp load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read checkpoint " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kCheckpointMagic) {
    throw InputError(path.string() + " is not a model checkpoint");
  }
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || count < 2 || count > 64) {
    throw InputError(path.string() + ": corrupt layer count");
  }
  std::vector<std::size_t> widths(count);
  for (auto& w : widths) {
    std::uint64_t w64 = 0;
    in.read(reinterpret_cast<char*>(&w64), sizeof(w64));
    w = w64;
  }
  Mlp model(widths);
  in.read(reinterpret_cast<char*>(model.params().data()),
          static_cast<std::streamsize>(model.num_params() * sizeof(double)));
  if (!in) throw InputError(path.string() + ": truncated parameters");
  return model;
}

}  // namespace egl
