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

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

#include "egl/errors.hpp"
#include "egl/kernels.hpp"

namespace egl {
namespace {

using ConstBlock = Eigen::Map<const RowMatrix>;

ConstBlock block_map(const LossParams& p, std::size_t block) {
  const auto d = static_cast<Eigen::Index>(p.dimension);
  return ConstBlock(p.raw.data() + block * p.dimension * p.dimension, d, d);
}

Eigen::Map<RowMatrix> grad_block(std::span<double> g, std::size_t d,
                                 std::size_t block) {
  const auto n = static_cast<Eigen::Index>(d);
  return Eigen::Map<RowMatrix>(g.data() + block * d * d, n, n);
}

Vector residual_of(const LossParams& p, const Vector& y_hat, const Vector& y) {
  if (static_cast<std::size_t>(y_hat.size()) != p.dimension ||
      static_cast<std::size_t>(y.size()) != p.dimension) {
    throw InputError("loss: expected dimension " +
                     std::to_string(p.dimension) + ", got " +
                     std::to_string(y_hat.size()) + " / " +
                     std::to_string(y.size()));
  }
  return y_hat - y;
}

// Top and bottom halves of F u for the directed quadratic.
struct DirectedParts {
  Vector pos;  // max(r, 0)
  Vector neg;  // min(r, 0)
  Vector top;  // L++ pos + L+- neg
  Vector bottom;  // L-+ pos + L-- neg
};

DirectedParts directed_parts(const LossParams& p, const Vector& r) {
  DirectedParts out;
  out.pos = r.cwiseMax(0.0);
  out.neg = r.cwiseMin(0.0);
  out.top = block_map(p, 0) * out.pos + block_map(p, 1) * out.neg;
  out.bottom = block_map(p, 2) * out.pos + block_map(p, 3) * out.neg;
  return out;
}

double closed_form_weight(std::span<const CandidateSample> samples,
                          const Vector& labels) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& s : samples) {
    const double d2 = (s.prediction - labels).squaredNorm();
    num += s.regret * d2;
    den += d2 * d2;
  }
  return den > 0.0 ? num / den : 0.0;
}

// Raw parameters equivalent to w0 |r|^2 (or the floor when w0 <= w_min).
Vector initial_raw(LossFamily family, std::size_t d, double w_min, double w0) {
  constexpr double kFloorGap = 1e-6;
  const double excess = std::max(w0 - w_min, kFloorGap);
  LossParams p = LossParams::zeros(family, d, w_min);
  switch (family) {
    case LossFamily::kMse:
      break;
    case LossFamily::kLz:
    case LossFamily::kWeightedMse:
    case LossFamily::kDirectedWeightedMse:
      p.raw.setConstant(softplus_inverse(excess));
      break;
    case LossFamily::kQuadratic:
    case LossFamily::kDirectedQuadratic: {
      const double c = std::sqrt(std::max(w0 - w_min, 1e-6));
      const std::size_t blocks = family == LossFamily::kQuadratic ? 1 : 4;
      for (std::size_t b = 0; b < blocks; b += 3) {
        for (std::size_t i = 0; i < d; ++i) {
          p.raw(static_cast<Eigen::Index>(b * d * d + i * d + i)) = c;
        }
      }
      break;
    }
  }
  return p.raw;
}

}  // namespace

std::string_view to_string(LossFamily family) {
  switch (family) {
    case LossFamily::kMse:
      return "mse";
    case LossFamily::kLz:
      return "lz";
    case LossFamily::kWeightedMse:
      return "wmse";
    case LossFamily::kQuadratic:
      return "quadratic";
    case LossFamily::kDirectedWeightedMse:
      return "dwmse";
    case LossFamily::kDirectedQuadratic:
      return "dquadratic";
  }
  return "unknown";
}

LossFamily loss_family_from_string(std::string_view name) {
  for (auto f : {LossFamily::kMse, LossFamily::kLz, LossFamily::kWeightedMse,
                 LossFamily::kQuadratic, LossFamily::kDirectedWeightedMse,
                 LossFamily::kDirectedQuadratic}) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("unknown loss family '" + std::string(name) + "'");
}

double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

double softplus_inverse(double y) {
  if (!(y > 0.0)) throw InputError("softplus_inverse: argument must be > 0");
  return y > 30.0 ? y : std::log(std::expm1(y));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t raw_param_count(LossFamily family, std::size_t d) {
  switch (family) {
    case LossFamily::kMse:
      return 0;
    case LossFamily::kLz:
      return 1;
    case LossFamily::kWeightedMse:
      return d;
    case LossFamily::kDirectedWeightedMse:
      return 2 * d;
    case LossFamily::kQuadratic:
      return d * d;
    case LossFamily::kDirectedQuadratic:
      return 4 * d * d;
  }
  return 0;
}

LossParams LossParams::zeros(LossFamily family, std::size_t dimension,
                             double w_min) {
  LossParams p;
  p.family = family;
  p.w_min = w_min;
  p.dimension = dimension;
  p.raw = Vector::Zero(
      static_cast<Eigen::Index>(raw_param_count(family, dimension)));
  return p;
}

void LossParams::validate() const {
  if (!(w_min > 0.0)) throw InputError("loss: w_min must be > 0");
  if (dimension == 0) throw InputError("loss: dimension must be >= 1");
  if (static_cast<std::size_t>(raw.size()) !=
      raw_param_count(family, dimension)) {
    throw InputError("loss: " + std::string(to_string(family)) + " expects " +
                     std::to_string(raw_param_count(family, dimension)) +
                     " raw parameters, got " + std::to_string(raw.size()));
  }
  check_finite(raw, "loss parameters");
}

Vector LossParams::weights() const {
  const auto d = static_cast<Eigen::Index>(dimension);
  switch (family) {
    case LossFamily::kLz:
      return Vector::Constant(d, w_min + softplus(raw(0)));
    case LossFamily::kWeightedMse:
    case LossFamily::kDirectedWeightedMse:
      return raw.head(d).unaryExpr(
          [this](double t) { return w_min + softplus(t); });
    default:
      throw CapabilityError("loss: " + std::string(to_string(family)) +
                            " has no weight vector");
  }
}

Vector LossParams::weights_minus() const {
  if (family != LossFamily::kDirectedWeightedMse) {
    throw CapabilityError("loss: only dwmse has negative-side weights");
  }
  const auto d = static_cast<Eigen::Index>(dimension);
  return raw.tail(d).unaryExpr(
      [this](double t) { return w_min + softplus(t); });
}

Matrix LossParams::factor(std::size_t block) const {
  const std::size_t blocks = family == LossFamily::kQuadratic          ? 1
                             : family == LossFamily::kDirectedQuadratic ? 4
                                                                        : 0;
  if (block >= blocks) {
    throw CapabilityError("loss: " + std::string(to_string(family)) +
                          " has no factor block " + std::to_string(block));
  }
  return block_map(*this, block);
}

double loss_eval(const LossParams& params, const Vector& y_hat,
                 const Vector& y) {
  const Vector r = residual_of(params, y_hat, y);
  const double wmin = params.w_min;
  switch (params.family) {
    case LossFamily::kMse:
      return r.squaredNorm() / static_cast<double>(r.size());
    case LossFamily::kLz:
      return (wmin + softplus(params.raw(0))) * r.squaredNorm();
    case LossFamily::kWeightedMse: {
      double sum = 0.0;
      for (Eigen::Index n = 0; n < r.size(); ++n) {
        sum += (wmin + softplus(params.raw(n))) * r(n) * r(n);
      }
      return sum;
    }
    case LossFamily::kDirectedWeightedMse: {
      const Eigen::Index d = r.size();
      double sum = 0.0;
      for (Eigen::Index n = 0; n < d; ++n) {
        const double t = r(n) >= 0.0 ? params.raw(n) : params.raw(d + n);
        sum += (wmin + softplus(t)) * r(n) * r(n);
      }
      return sum;
    }
    case LossFamily::kQuadratic:
      return (block_map(params, 0) * r).squaredNorm() + wmin * r.squaredNorm();
    case LossFamily::kDirectedQuadratic: {
      const DirectedParts p = directed_parts(params, r);
      return p.top.squaredNorm() + p.bottom.squaredNorm() +
             wmin * r.squaredNorm();
    }
  }
  return 0.0;
}

Vector loss_grad(const LossParams& params, const Vector& y_hat,
                 const Vector& y) {
  const Vector r = residual_of(params, y_hat, y);
  const double wmin = params.w_min;
  const Eigen::Index d = r.size();
  switch (params.family) {
    case LossFamily::kMse:
      return 2.0 * r / static_cast<double>(d);
    case LossFamily::kLz:
      return 2.0 * (wmin + softplus(params.raw(0))) * r;
    case LossFamily::kWeightedMse: {
      Vector g(d);
      for (Eigen::Index n = 0; n < d; ++n) {
        g(n) = 2.0 * (wmin + softplus(params.raw(n))) * r(n);
      }
      return g;
    }
    case LossFamily::kDirectedWeightedMse: {
      Vector g(d);
      for (Eigen::Index n = 0; n < d; ++n) {
        const double t = r(n) >= 0.0 ? params.raw(n) : params.raw(d + n);
        g(n) = 2.0 * (wmin + softplus(t)) * r(n);
      }
      return g;
    }
    case LossFamily::kQuadratic: {
      const auto l = block_map(params, 0);
      return 2.0 * (l.transpose() * (l * r)) + 2.0 * wmin * r;
    }
    case LossFamily::kDirectedQuadratic: {
      const DirectedParts p = directed_parts(params, r);
      // F' v split into the columns acting on pos and on neg.
      const Vector on_pos = block_map(params, 0).transpose() * p.top +
                            block_map(params, 2).transpose() * p.bottom;
      const Vector on_neg = block_map(params, 1).transpose() * p.top +
                            block_map(params, 3).transpose() * p.bottom;
      Vector g(d);
      for (Eigen::Index n = 0; n < d; ++n) {
        g(n) = 2.0 * (r(n) >= 0.0 ? on_pos(n) : on_neg(n)) + 2.0 * wmin * r(n);
      }
      return g;
    }
  }
  return Vector::Zero(d);
}

double loss_eval_param_grad(const LossParams& params, const Vector& y_hat,
                            const Vector& y, double scale,
                            std::span<double> raw_grad) {
  if (raw_grad.size() != static_cast<std::size_t>(params.raw.size())) {
    throw InputError("loss: raw gradient buffer has the wrong size");
  }
  const Vector r = residual_of(params, y_hat, y);
  const double wmin = params.w_min;
  const Eigen::Index d = r.size();
  const std::size_t du = params.dimension;
  switch (params.family) {
    case LossFamily::kMse:
      return r.squaredNorm() / static_cast<double>(d);
    case LossFamily::kLz: {
      const double t = params.raw(0);
      const double r2 = r.squaredNorm();
      raw_grad[0] += scale * r2 * sigmoid(t);
      return (wmin + softplus(t)) * r2;
    }
    case LossFamily::kWeightedMse:
    case LossFamily::kDirectedWeightedMse: {
      const bool directed = params.family == LossFamily::kDirectedWeightedMse;
      double sum = 0.0;
      for (Eigen::Index n = 0; n < d; ++n) {
        const Eigen::Index k = directed && r(n) < 0.0 ? d + n : n;
        const double t = params.raw(k);
        const double r2 = r(n) * r(n);
        sum += (wmin + softplus(t)) * r2;
        raw_grad[static_cast<std::size_t>(k)] += scale * r2 * sigmoid(t);
      }
      return sum;
    }
    case LossFamily::kQuadratic: {
      const Vector lr = block_map(params, 0) * r;
      grad_block(raw_grad, du, 0).noalias() += (2.0 * scale) * lr * r.transpose();
      return lr.squaredNorm() + wmin * r.squaredNorm();
    }
    case LossFamily::kDirectedQuadratic: {
      const DirectedParts p = directed_parts(params, r);
      const double s2 = 2.0 * scale;
      grad_block(raw_grad, du, 0).noalias() += s2 * p.top * p.pos.transpose();
      grad_block(raw_grad, du, 1).noalias() += s2 * p.top * p.neg.transpose();
      grad_block(raw_grad, du, 2).noalias() += s2 * p.bottom * p.pos.transpose();
      grad_block(raw_grad, du, 3).noalias() += s2 * p.bottom * p.neg.transpose();
      return p.top.squaredNorm() + p.bottom.squaredNorm() +
             wmin * r.squaredNorm();
    }
  }
  return 0.0;
}

Matrix loss_hessian(const LossParams& params, const Vector& residual) {
  if (static_cast<std::size_t>(residual.size()) != params.dimension) {
    throw InputError("loss_hessian: residual has the wrong dimension");
  }
  const auto d = static_cast<Eigen::Index>(params.dimension);
  const double wmin = params.w_min;
  switch (params.family) {
    case LossFamily::kMse:
      return Matrix::Identity(d, d) * (2.0 / static_cast<double>(d));
    case LossFamily::kLz:
    case LossFamily::kWeightedMse:
      return Matrix(2.0 * params.weights().asDiagonal());
    case LossFamily::kDirectedWeightedMse: {
      const Vector plus = params.weights();
      const Vector minus = params.weights_minus();
      Vector diag(d);
      for (Eigen::Index n = 0; n < d; ++n) {
        diag(n) = 2.0 * (residual(n) >= 0.0 ? plus(n) : minus(n));
      }
      return Matrix(diag.asDiagonal());
    }
    case LossFamily::kQuadratic: {
      const auto l = block_map(params, 0);
      return 2.0 * (l.transpose() * l + wmin * Matrix::Identity(d, d));
    }
    case LossFamily::kDirectedQuadratic: {
      // F S with S selecting each coordinate's sign column.
      Matrix fs(2 * d, d);
      for (Eigen::Index n = 0; n < d; ++n) {
        const bool pos = residual(n) >= 0.0;
        fs.col(n).head(d) = block_map(params, pos ? 0 : 1).col(n);
        fs.col(n).tail(d) = block_map(params, pos ? 2 : 3).col(n);
      }
      return 2.0 * (fs.transpose() * fs + wmin * Matrix::Identity(d, d));
    }
  }
  return Matrix::Zero(d, d);
}

double lz_closed_form_weight(std::span<const CandidateSample> samples,
                             const Vector& labels) {
  for (const auto& s : samples) {
    if (!s.has_regret()) throw InputError("sample without regret");
    check_dimension(static_cast<std::size_t>(s.prediction.size()),
                    static_cast<std::size_t>(labels.size()), "sample prediction");
  }
  return closed_form_weight(samples, labels);
}

void LossFitConfig::validate() const {
  if (!(w_min > 0.0)) throw ConfigError("loss fit: w_min must be > 0");
  if (!(learning_rate > 0.0)) {
    throw ConfigError("loss fit: learning rate must be > 0");
  }
}

double fit_error(const LossParams& params,
                 std::span<const CandidateSample> samples,
                 const Vector& labels) {
  if (samples.empty()) throw InputError("fit_error: no samples");
  double sum = 0.0;
  for (const auto& s : samples) {
    const double e = loss_eval(params, s.prediction, labels) - s.regret;
    sum += e * e;
  }
  return sum / static_cast<double>(samples.size());
}

LossFit fit_lodl(std::span<const CandidateSample> samples,
                 const Vector& labels, const LossFitConfig& config) {
  config.validate();
  if (samples.empty()) throw InputError("fit_lodl: no samples");
  for (const auto& s : samples) {
    if (!s.has_regret()) throw InputError("fit_lodl: sample without regret");
  }
  const auto d = static_cast<std::size_t>(labels.size());
  const double w0 = lz_closed_form_weight(samples, labels);

  LossFit fit;
  fit.params = LossParams::zeros(config.family, d, config.w_min);
  fit.params.raw = initial_raw(config.family, d, config.w_min, w0);
  if (config.family == LossFamily::kMse) {
    fit.fit_mse = fit_error(fit.params, samples, labels);
    return fit;
  }

  const auto n = fit.params.raw.size();
  Optimizer adam(OptimizerKind::kAdam, static_cast<std::size_t>(n));
  AlignedBuffer g(static_cast<std::size_t>(n));
  const double inv = 1.0 / static_cast<double>(samples.size());
  Vector best = fit.params.raw;
  double best_mse = std::numeric_limits<double>::infinity();
  for (std::size_t step = 0; step <= config.steps; ++step) {
    std::fill(g.begin(), g.end(), 0.0);
    double mse = 0.0;
    for (const auto& s : samples) {
      // First pass for the residual value, then the scaled parameter grad.
      const double value = loss_eval(fit.params, s.prediction, labels);
      const double e = value - s.regret;
      mse += e * e * inv;
      loss_eval_param_grad(fit.params, s.prediction, labels, 2.0 * e * inv, g);
    }
    if (!std::isfinite(mse)) {
      throw FittingError("fit_lodl: non-finite fit error at step " +
                         std::to_string(step));
    }
    if (mse < best_mse) {
      best_mse = mse;
      best = fit.params.raw;
    }
    if (step == config.steps) break;
    adam.step(std::span<double>(fit.params.raw.data(),
                                static_cast<std::size_t>(n)),
              g, config.learning_rate);
  }
  fit.params.raw = best;
  fit.fit_mse = best_mse;
  return fit;
}

std::vector<LossFit> fit_lodl_batch(
    const SampleMap& samples, std::span<const PtoInstance* const> instances,
    const LossFitConfig& config, ExecutionPolicy policy) {
  std::vector<LossFit> out(instances.size());
  kernels::parallel_for(instances.size(), policy, [&](std::size_t i) {
    const auto it = samples.find(instances[i]->id);
    if (it == samples.end()) {
      throw InputError("fit_lodl: no samples for instance " +
                       std::to_string(instances[i]->id));
    }
    out[i] = fit_lodl(it->second, instances[i]->labels, config);
  });
  return out;
}

std::size_t fbp_heads(LossFamily family) {
  switch (family) {
    case LossFamily::kWeightedMse:
    case LossFamily::kQuadratic:
      return 1;
    case LossFamily::kDirectedWeightedMse:
      return 2;
    case LossFamily::kDirectedQuadratic:
      return 4;
    default:
      throw CapabilityError("feature-based parameterization does not support " +
                            std::string(to_string(family)));
  }
}

bool fbp_pairwise(LossFamily family) {
  return family == LossFamily::kQuadratic ||
         family == LossFamily::kDirectedQuadratic;
}

void FbpConfig::validate() const {
  fbp_heads(family);
  if (!(w_min > 0.0)) throw ConfigError("fbp: w_min must be > 0");
  if (hidden == 0 || pairwise_hidden == 0) {
    throw ConfigError("fbp: hidden width must be >= 1");
  }
  if (layers < 1) throw ConfigError("fbp: at least one layer");
}

Matrix fbp_inputs(const FbpNetwork& network, const PtoInstance& instance) {
  const std::size_t d = instance.dimension();
  const std::size_t f = network.feature_width();
  if (prediction_feature_width(instance) != f) {
    throw InputError("fbp: instance " + std::to_string(instance.id) +
                     " has feature width " +
                     std::to_string(prediction_feature_width(instance)) +
                     ", network expects " + std::to_string(f));
  }
  const auto fi = static_cast<Eigen::Index>(f);
  Matrix feats(fi, static_cast<Eigen::Index>(d));
  for (std::size_t n = 0; n < d; ++n) {
    feats.col(static_cast<Eigen::Index>(n)) =
        (prediction_feature(instance, n) - network.feature_mean)
            .cwiseQuotient(network.feature_scale);
  }
  if (!fbp_pairwise(network.family)) return feats;
  Matrix pairs(2 * fi + 1, static_cast<Eigen::Index>(d * d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      auto col = pairs.col(static_cast<Eigen::Index>(i * d + j));
      col.head(fi) = feats.col(static_cast<Eigen::Index>(i));
      col.segment(fi, fi) = feats.col(static_cast<Eigen::Index>(j));
      col(2 * fi) = i == j ? 1.0 : 0.0;
    }
  }
  return pairs;
}

namespace {

// Index of raw parameter k in the flattened network outputs.
std::size_t output_index(LossFamily family, std::size_t d, std::size_t k) {
  switch (family) {
    case LossFamily::kWeightedMse:
    case LossFamily::kQuadratic:
      return k;
    case LossFamily::kDirectedWeightedMse:
      return k < d ? 2 * k : 2 * (k - d) + 1;
    case LossFamily::kDirectedQuadratic: {
      const std::size_t block = k / (d * d);
      return (k % (d * d)) * 4 + block;
    }
    default:
      throw CapabilityError("fbp: unsupported family");
  }
}

bool offset_entry(LossFamily family, std::size_t d, std::size_t k) {
  if (!fbp_pairwise(family)) return false;
  const std::size_t block = k / (d * d);
  const std::size_t within = k % (d * d);
  return (block == 0 || block == 3) && within / d == within % d;
}

// Per-instance fit error of the loss induced by P_psi.
class FbpObjective final : public ExampleObjective {
 public:
  FbpObjective(const FbpNetwork& shape, const SampleMap& samples,
               std::span<const PtoInstance* const> instances)
      : shape_(shape) {
    for (const auto* inst : instances) {
      const auto it = samples.find(inst->id);
      if (it == samples.end() || it->second.empty()) {
        throw InputError("fbp: no samples for instance " +
                         std::to_string(inst->id));
      }
      for (const auto& s : it->second) {
        if (!s.has_regret()) throw InputError("fbp: sample without regret");
      }
      inputs_.push_back(fbp_inputs(shape, *inst));
      labels_.push_back(inst->labels);
      samples_.push_back(&it->second);
    }
  }

  std::size_t size() const override { return inputs_.size(); }
  const Matrix& inputs(std::size_t example) const override {
    return inputs_[example];
  }

  double evaluate(std::size_t example, const Vector& outputs,
                  Vector* grad) const override {
    const Vector& y = labels_[example];
    const auto d = static_cast<std::size_t>(y.size());
    const LossParams params = params_from_outputs(shape_, d, outputs);
    const auto& samples = *samples_[example];
    const double inv = 1.0 / static_cast<double>(samples.size());
    AlignedBuffer raw_grad(static_cast<std::size_t>(params.raw.size()));
    double mse = 0.0;
    for (const auto& s : samples) {
      const double e = loss_eval(params, s.prediction, y) - s.regret;
      mse += e * e * inv;
      if (grad != nullptr) {
        loss_eval_param_grad(params, s.prediction, y, 2.0 * e * inv, raw_grad);
      }
    }
    if (grad != nullptr) {
      grad->setZero(outputs.size());
      for (std::size_t k = 0; k < raw_grad.size(); ++k) {
        (*grad)(static_cast<Eigen::Index>(output_index(shape_.family, d, k))) =
            raw_grad[k];
      }
    }
    return mse;
  }

 private:
  FbpNetwork shape_;  // family and standardization; `net` unused
  std::vector<Matrix> inputs_;
  std::vector<Vector> labels_;
  std::vector<const std::vector<CandidateSample>*> samples_;
};

}  // namespace

LossParams params_from_outputs(const FbpNetwork& network, std::size_t d,
                               const Vector& outputs) {
  LossParams p = LossParams::zeros(network.family, d, network.w_min);
  const std::size_t expected =
      (fbp_pairwise(network.family) ? d * d : d) * fbp_heads(network.family);
  if (static_cast<std::size_t>(outputs.size()) != expected) {
    throw InputError("fbp: expected " + std::to_string(expected) +
                     " outputs, got " + std::to_string(outputs.size()));
  }
  for (std::size_t k = 0; k < static_cast<std::size_t>(p.raw.size()); ++k) {
    double v = outputs(static_cast<Eigen::Index>(
        output_index(network.family, d, k)));
    if (offset_entry(network.family, d, k)) v += network.diagonal_offset;
    p.raw(static_cast<Eigen::Index>(k)) = v;
  }
  return p;
}

LossParams induced_params(const FbpNetwork& network,
                          const PtoInstance& instance) {
  return params_from_outputs(
      network, instance.dimension(),
      predict_example(network.net, fbp_inputs(network, instance)));
}

FbpFit fit_fbp(const SampleMap& samples,
               std::span<const PtoInstance* const> train,
               std::span<const PtoInstance* const> validation,
               const FbpConfig& config, const TrainConfig& train_config) {
  config.validate();
  train_config.validate();
  if (train.empty()) throw InputError("fit_fbp: no training instances");

  FbpNetwork network;
  network.family = config.family;
  network.w_min = config.w_min;

  // Feature standardization over every training prediction.
  const std::size_t f = prediction_feature_width(*train.front());
  const auto fi = static_cast<Eigen::Index>(f);
  Vector sum = Vector::Zero(fi);
  Vector sum_sq = Vector::Zero(fi);
  double count = 0.0;
  for (const auto* inst : train) {
    if (prediction_feature_width(*inst) != f) {
      throw InputError("fit_fbp: instances disagree on feature width");
    }
    for (std::size_t n = 0; n < inst->dimension(); ++n) {
      const Vector x = prediction_feature(*inst, n);
      sum += x;
      sum_sq += x.cwiseProduct(x);
      count += 1.0;
    }
  }
  network.feature_mean = sum / count;
  network.feature_scale =
      (sum_sq / count - network.feature_mean.cwiseProduct(network.feature_mean))
          .cwiseMax(0.0)
          .cwiseSqrt()
          .unaryExpr([](double s) { return s > 1e-12 ? s : 1.0; });

  // Pooled closed-form scale seeds the output layer.
  double num = 0.0;
  double den = 0.0;
  for (const auto* inst : train) {
    const auto it = samples.find(inst->id);
    if (it == samples.end()) continue;
    for (const auto& s : it->second) {
      const double d2 = (s.prediction - inst->labels).squaredNorm();
      num += s.regret * d2;
      den += d2 * d2;
    }
  }
  const double w0 = den > 0.0 ? num / den : 0.0;

  const std::size_t heads = fbp_heads(config.family);
  const std::size_t in = fbp_pairwise(config.family) ? 2 * f + 1 : f;
  const std::size_t hidden =
      fbp_pairwise(config.family) ? config.pairwise_hidden : config.hidden;
  std::vector<std::size_t> widths{in};
  for (std::size_t l = 1; l < config.layers; ++l) widths.push_back(hidden);
  widths.push_back(heads);
  network.net = Mlp(widths);
  network.net.init_he_uniform(config.seed);
  const std::size_t last = network.net.num_layers() - 1;
  network.net.weight(last) *= 0.1;
  if (fbp_pairwise(config.family)) {
    network.net.bias(last).setZero();
    network.diagonal_offset = std::sqrt(std::max(w0 - config.w_min, 1e-6));
  } else {
    network.net.bias(last).setConstant(
        softplus_inverse(std::max(w0 - config.w_min, 1e-6)));
  }

  const FbpObjective objective(network, samples, train);
  ValidationFn validate_fn;
  std::unique_ptr<FbpObjective> val_objective;
  std::vector<std::size_t> val_index;
  if (!validation.empty()) {
    val_objective = std::make_unique<FbpObjective>(network, samples, validation);
    val_index.resize(validation.size());
    std::iota(val_index.begin(), val_index.end(), std::size_t{0});
    validate_fn = [&](const Mlp& model) {
      return kernels::mean_loss(model, *val_objective, val_index,
                                train_config.policy);
    };
  }

  FbpFit fit;
  fit.history = egl::train(network.net, objective, train_config, validate_fn);
  std::vector<std::size_t> train_index(train.size());
  std::iota(train_index.begin(), train_index.end(), std::size_t{0});
  fit.train_fit_mse = kernels::mean_loss(network.net, objective, train_index,
                                         train_config.policy);
  fit.validation_fit_mse =
      validate_fn ? validate_fn(network.net) : fit.train_fit_mse;
  fit.network = std::move(network);
  return fit;
}

LearnedLossObjective::LearnedLossObjective(
    std::span<const PtoInstance* const> instances,
    std::vector<LossParams> params)
    : params_(std::move(params)) {
  if (params_.size() != instances.size()) {
    throw InputError("learned loss: one parameter set per instance required");
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (params_[i].dimension != instances[i]->dimension()) {
      throw InputError("learned loss: dimension mismatch for instance " +
                       std::to_string(instances[i]->id));
    }
    inputs_.push_back(feature_matrix(*instances[i]));
    labels_.push_back(instances[i]->labels);
  }
}

double LearnedLossObjective::evaluate(std::size_t example,
                                      const Vector& outputs,
                                      Vector* grad) const {
  if (grad != nullptr) {
    *grad = loss_grad(params_[example], outputs, labels_[example]);
  }
  return loss_eval(params_[example], outputs, labels_[example]);
}

double optimal_wmse_prediction(std::span<const double> labels,
                               std::span<const double> probabilities,
                               std::span<const double> weights) {
  if (labels.empty() || labels.size() != probabilities.size() ||
      labels.size() != weights.size()) {
    throw InputError("optimal_wmse_prediction: mismatched outcome lists");
  }
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw InputError("probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InputError("probabilities must sum to 1");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!(weights[i] > 0.0)) throw InputError("weights must be > 0");
    num += probabilities[i] * weights[i] * labels[i];
    den += probabilities[i] * weights[i];
  }
  if (!(den > 0.0)) throw InputError("expected weight is zero");
  return num / den;
}

}  // namespace egl
