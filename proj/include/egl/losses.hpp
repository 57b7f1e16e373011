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

// Convex parametric surrogate losses of the prediction residual, their
// per-instance fits to sampled regrets, and the feature-based network that
// predicts loss parameters from per-prediction features.

#ifndef EGL_LOSSES_HPP_
#define EGL_LOSSES_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "egl/core.hpp"
#include "egl/sampling.hpp"
#include "egl/tensor_nn.hpp"

namespace egl {

enum class LossFamily {
  kMse,
  kLz,
  kWeightedMse,
  kQuadratic,
  kDirectedWeightedMse,
  kDirectedQuadratic,
};

// "mse", "lz", "wmse", "quadratic", "dwmse", "dquadratic".
std::string_view to_string(LossFamily family);
LossFamily loss_family_from_string(std::string_view name);

inline constexpr double kDefaultWMin = 0.01;

double softplus(double x);
double softplus_inverse(double y);  // y > 0
double sigmoid(double x);

// Number of raw parameters of `family` at dimension D.
std::size_t raw_param_count(LossFamily family, std::size_t dimension);

// Raw parameter layouts (w = w_min + softplus(theta) for weight entries):
//   kMse                 none
//   kLz                  [theta]
//   kWeightedMse         theta (D)
//   kDirectedWeightedMse [theta+ (D), theta- (D)]
//   kQuadratic           L, row-major D x D; loss r'(L'L + w_min I)r
//   kDirectedQuadratic   blocks [L++, L+-, L-+, L--], each row-major D x D.
//                        With u = [max(r,0); min(r,0)] and F the 2D x 2D
//                        block matrix, loss = |F u|^2 + w_min |r|^2.
// Directed families take the '+' branch where the residual is exactly zero.
struct LossParams {
  LossFamily family = LossFamily::kMse;
  double w_min = kDefaultWMin;
  std::size_t dimension = 0;
  Vector raw;

  // Zero raw parameters of the right size.
  static LossParams zeros(LossFamily family, std::size_t dimension,
                          double w_min = kDefaultWMin);

  // Throws InputError on a size mismatch, w_min <= 0 or non-finite entries.
  void validate() const;

  // Effective weights (D entries; LZ repeats its scalar). Weight families.
  Vector weights() const;
  Vector weights_minus() const;  // kDirectedWeightedMse only

  // D x D factor block; block 0 for kQuadratic, 0..3 for kDirectedQuadratic.
  Matrix factor(std::size_t block = 0) const;
};

// Loss value at prediction y_hat with labels y.
double loss_eval(const LossParams& params, const Vector& y_hat,
                 const Vector& y);

// d loss / d y_hat.
Vector loss_grad(const LossParams& params, const Vector& y_hat,
                 const Vector& y);

// Loss value; adds scale * d loss / d raw into `raw_grad`.
double loss_eval_param_grad(const LossParams& params, const Vector& y_hat,
                            const Vector& y, double scale,
                            std::span<double> raw_grad);

// Hessian in y_hat on the orthant containing y_hat - y (constant there).
Matrix loss_hessian(const LossParams& params, const Vector& residual);

// Least-squares scalar weight sum(r |d|^2) / sum(|d|^4); 0 without spread.
double lz_closed_form_weight(std::span<const CandidateSample> samples,
                             const Vector& labels);

struct LossFitConfig {
  LossFamily family = LossFamily::kWeightedMse;
  double w_min = kDefaultWMin;
  std::size_t steps = 300;
  double learning_rate = 0.05;

  void validate() const;
};

struct LossFit {
  LossParams params;
  double fit_mse = 0.0;
};

// Full-batch Adam on the raw parameters minimizing mean (loss - regret)^2
// over one instance's samples, started from the closed-form scalar fit.
// Throws FittingError on a non-finite objective.
LossFit fit_lodl(std::span<const CandidateSample> samples,
                 const Vector& labels, const LossFitConfig& config);

// fit_lodl for every instance with samples; results in `instances` order.
std::vector<LossFit> fit_lodl_batch(
    const SampleMap& samples, std::span<const PtoInstance* const> instances,
    const LossFitConfig& config,
    ExecutionPolicy policy = ExecutionPolicy::kParallel);

// Mean squared fit error of `params` on one instance's samples.
double fit_error(const LossParams& params,
                 std::span<const CandidateSample> samples,
                 const Vector& labels);

// Number of network outputs per input column: 1 (wmse, quadratic),
// 2 (dwmse) or 4 (dquadratic). Throws CapabilityError otherwise.
std::size_t fbp_heads(LossFamily family);
bool fbp_pairwise(LossFamily family);

struct FbpConfig {
  LossFamily family = LossFamily::kDirectedWeightedMse;
  double w_min = kDefaultWMin;
  std::size_t hidden = 64;
  // Pairwise families evaluate D^2 columns per instance.
  std::size_t pairwise_hidden = 32;
  std::size_t layers = 4;  // weight layers
  std::uint64_t seed = 0;

  void validate() const;
};

// P_psi with its input standardization. Pairwise families see
// [f_i; f_j; 1[i == j]] per ordered pair (column i * D + j); the others see
// f_n per prediction. `diagonal_offset` is added to the diagonal of every
// factor block on the main block diagonal.
struct FbpNetwork {
  LossFamily family = LossFamily::kDirectedWeightedMse;
  double w_min = kDefaultWMin;
  Mlp net;
  Vector feature_mean;
  Vector feature_scale;
  double diagonal_offset = 0.0;

  std::size_t feature_width() const {
    return static_cast<std::size_t>(feature_mean.size());
  }
};

// Input columns of P_psi for one instance.
Matrix fbp_inputs(const FbpNetwork& network, const PtoInstance& instance);

// Maps flattened network outputs (column-major) to LossParams.
LossParams params_from_outputs(const FbpNetwork& network,
                               std::size_t dimension, const Vector& outputs);

// Runs P_psi over the instance's features (or feature pairs).
LossParams induced_params(const FbpNetwork& network,
                          const PtoInstance& instance);

struct FbpFit {
  FbpNetwork network;
  TrainHistory history;
  double train_fit_mse = 0.0;
  double validation_fit_mse = 0.0;
};

// Trains P_psi on the pooled samples of `train` with early stopping on the
// fit error of `validation` (skipped when empty).
FbpFit fit_fbp(const SampleMap& samples,
               std::span<const PtoInstance* const> train,
               std::span<const PtoInstance* const> validation,
               const FbpConfig& config, const TrainConfig& train_config);

// Step-4 objective: example i is instance i scored by its learned loss.
class LearnedLossObjective final : public ExampleObjective {
 public:
  LearnedLossObjective(std::span<const PtoInstance* const> instances,
                       std::vector<LossParams> params);
  std::size_t size() const override { return inputs_.size(); }
  const Matrix& inputs(std::size_t example) const override {
    return inputs_[example];
  }
  double evaluate(std::size_t example, const Vector& outputs,
                  Vector* grad) const override;

 private:
  std::vector<Matrix> inputs_;
  std::vector<Vector> labels_;
  std::vector<LossParams> params_;
};

// Minimizer of E[w (y_hat - y)^2] over outcomes y with probabilities p:
// E[w y] / E[w]. Throws InputError if the probabilities do not sum to 1
// (within 1e-9), a weight is not positive, or the expected weight is zero.
double optimal_wmse_prediction(std::span<const double> labels,
                               std::span<const double> probabilities,
                               std::span<const double> weights);

}  // namespace egl

#endif  // EGL_LOSSES_HPP_
