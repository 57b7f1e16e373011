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

// Synthetic dataset generators for the benchmark domains and train /
// validation / test splitting.

#ifndef EGL_DATAGEN_HPP_
#define EGL_DATAGEN_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "egl/core.hpp"

namespace egl {

enum class Domain { kCubic, kCubicHard, kWebAdv, kPortfolio };

std::string_view to_string(Domain domain);
Domain domain_from_string(std::string_view name);

enum class CubicVariant { kStandard, kHard };

// y = 10x^3 - 6.5x (standard) or 10x^3 - 7.5x (hard).
double cubic_label(double x, CubicVariant variant);

struct SplitFractions {
  double train = 0.7;
  double validation = 0.15;
  double test = 0.15;

  // Throws InputError unless all are >= 0 and they sum to 1 within 1e-9.
  void validate() const;
};

enum class SplitMode { kIid, kTemporal };

struct DatasetSpec {
  Domain domain = Domain::kCubic;
  std::size_t num_instances = 150;
  std::uint64_t seed = 0;
  SplitFractions fractions;

  // Cubic: N resources, choose the top K.
  std::size_t resources = 50;
  std::size_t k = 1;

  // Web advertising: M sites x N users, choose K sites (k above).
  std::size_t sites = 5;
  std::size_t users = 10;
  double ctr_beta_a = 2.0;
  double ctr_beta_b = 5.0;
  bool zero_ctr = false;  // debug: force every CTR to zero

  // Portfolio: D stocks with `history` lagged returns as features.
  std::size_t stocks = 50;
  std::size_t history = 10;
  std::size_t factors = 3;
  double noise = 1.0;
  double risk_aversion = 0.001;
};

struct Dataset {
  DatasetSpec spec;
  std::string generator_version;
  std::vector<PtoInstance> instances;
  // Portfolio only: correlation matrix used by the downstream problem.
  std::optional<Matrix> covariance;

  std::vector<const PtoInstance*> split(Split which) const;
  const PtoInstance& find(std::uint64_t id) const;
};

inline constexpr std::string_view kGeneratorVersion = "egl-datagen/1";

Dataset gen_cubic(std::size_t num_instances, std::size_t resources,
                  CubicVariant variant, std::uint64_t seed);

Dataset gen_webadv(std::size_t num_instances, std::size_t users,
                   std::size_t sites, std::uint64_t seed,
                   double beta_a = 2.0, double beta_b = 5.0,
                   bool zero_ctr = false);

struct PortfolioFactorModel {
  std::size_t factors = 3;
  double noise = 1.0;
};

// Throws GenerationError when projecting the sample correlation onto the PSD
// cone moves an eigenvalue by more than 0.1.
Dataset gen_portfolio(std::size_t num_instances, std::size_t stocks,
                      std::size_t history, std::uint64_t seed,
                      PortfolioFactorModel model = {});

// Reference-scale defaults for a domain: cubic N=50/K=1, web-adv 5x10/K=2,
// portfolio D=50.
DatasetSpec default_spec(Domain domain, std::size_t num_instances,
                         std::uint64_t seed);

// Dispatches on spec.domain and copies the remaining spec fields.
Dataset generate(const DatasetSpec& spec);

// Train count rounds half up, validation rounds down, test takes the rest.
Dataset split_dataset(Dataset dataset, const SplitFractions& fractions,
                      SplitMode mode, std::uint64_t seed);

SplitMode default_split_mode(Domain domain);

// Builds the downstream optimization problem a dataset parameterizes.
std::shared_ptr<const DecisionProblem> make_problem(const Dataset& dataset);

// Symmetrizes and clamps negative eigenvalues to zero; returns the largest
// eigenvalue shift through `shift`.
Matrix project_psd(const Matrix& m, double* shift = nullptr);

}  // namespace egl

#endif  // EGL_DATAGEN_HPP_
