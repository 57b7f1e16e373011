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

#include "egl/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "egl/problems.hpp"

namespace egl {
namespace {

constexpr double kMaxPsdShift = 0.1;
constexpr std::size_t kPortfolioBurnIn = 50;

DatasetSpec base_spec(Domain domain, std::size_t n, std::uint64_t seed) {
  DatasetSpec spec;
  spec.domain = domain;
  spec.num_instances = n;
  spec.seed = seed;
  return spec;
}

}  // namespace

std::string_view to_string(Domain domain) {
  switch (domain) {
    case Domain::kCubic:
      return "cubic";
    case Domain::kCubicHard:
      return "cubic_hard";
    case Domain::kWebAdv:
      return "webadv";
    case Domain::kPortfolio:
      return "portfolio";
  }
  return "unknown";
}

Domain domain_from_string(std::string_view name) {
  if (name == "cubic") return Domain::kCubic;
  if (name == "cubic_hard") return Domain::kCubicHard;
  if (name == "webadv") return Domain::kWebAdv;
  if (name == "portfolio") return Domain::kPortfolio;
  throw ConfigError("unknown domain '" + std::string(name) + "'");
}

double cubic_label(double x, CubicVariant variant) {
  const double linear = variant == CubicVariant::kStandard ? 6.5 : 7.5;
  return 10.0 * x * x * x - linear * x;
}

void SplitFractions::validate() const {
  if (train < 0.0 || validation < 0.0 || test < 0.0) {
    throw InputError("split fractions must be non-negative");
  }
  if (std::abs(train + validation + test - 1.0) > 1e-9) {
    throw InputError("split fractions must sum to 1");
  }
}

std::vector<const PtoInstance*> Dataset::split(Split which) const {
  std::vector<const PtoInstance*> out;
  for (const auto& inst : instances) {
    if (inst.split == which) out.push_back(&inst);
  }
  return out;
}

const PtoInstance& Dataset::find(std::uint64_t id) const {
  for (const auto& inst : instances) {
    if (inst.id == id) return inst;
  }
  throw InputError("no instance with id " + std::to_string(id));
}

Dataset gen_cubic(std::size_t num_instances, std::size_t resources,
                  CubicVariant variant, std::uint64_t seed) {
  if (resources == 0) throw InputError("cubic: N must be >= 1");
  Dataset ds;
  ds.spec = base_spec(
      variant == CubicVariant::kStandard ? Domain::kCubic : Domain::kCubicHard,
      num_instances, seed);
  ds.spec.resources = resources;
  ds.generator_version = std::string(kGeneratorVersion);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> feature(-1.0, 1.0);
  const auto n = static_cast<Eigen::Index>(resources);
  for (std::size_t i = 0; i < num_instances; ++i) {
    PtoInstance inst;
    inst.id = i;
    inst.labels.resize(n);
    inst.features.reserve(resources);
    for (Eigen::Index r = 0; r < n; ++r) {
      const double x = feature(rng);
      inst.features.push_back(Vector::Constant(1, x));
      inst.labels(r) = cubic_label(x, variant);
    }
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

Dataset gen_webadv(std::size_t num_instances, std::size_t users,
                   std::size_t sites, std::uint64_t seed, double beta_a,
                   double beta_b, bool zero_ctr) {
  if (users == 0 || sites == 0) throw InputError("web-adv: N, M must be >= 1");
  Dataset ds;
  ds.spec = base_spec(Domain::kWebAdv, num_instances, seed);
  ds.spec.users = users;
  ds.spec.sites = sites;
  ds.spec.k = std::min<std::size_t>(2, sites);
  ds.spec.ctr_beta_a = beta_a;
  ds.spec.ctr_beta_b = beta_b;
  ds.spec.zero_ctr = zero_ctr;
  ds.generator_version = std::string(kGeneratorVersion);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::gamma_distribution<double> gamma_a(beta_a, 1.0);
  std::gamma_distribution<double> gamma_b(beta_b, 1.0);
  const auto n = static_cast<Eigen::Index>(users);
  Matrix mixing(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) mixing(r, c) = unit(rng);
  }
  for (std::size_t i = 0; i < num_instances; ++i) {
    PtoInstance inst;
    inst.id = i;
    inst.labels.resize(static_cast<Eigen::Index>(sites * users));
    for (std::size_t m = 0; m < sites; ++m) {
      Vector ctr(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double a = gamma_a(rng);
        const double b = gamma_b(rng);
        ctr(j) = zero_ctr ? 0.0 : a / (a + b);
      }
      inst.labels.segment(static_cast<Eigen::Index>(m) * n, n) = ctr;
      inst.features.push_back(mixing * ctr);
    }
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

Matrix project_psd(const Matrix& m, double* shift) {
  const Matrix sym = 0.5 * (m + m.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Vector values = eig.eigenvalues();
  double moved = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) < 0.0) {
      moved = std::max(moved, -values(i));
      values(i) = 0.0;
    }
  }
  if (shift != nullptr) *shift = moved;
  const Matrix& v = eig.eigenvectors();
  Matrix out = v * values.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

Dataset gen_portfolio(std::size_t num_instances, std::size_t stocks,
                      std::size_t history, std::uint64_t seed,
                      PortfolioFactorModel model) {
  if (stocks < 2) throw InputError("portfolio: need at least 2 stocks");
  if (history < 1) throw InputError("portfolio: history_len must be >= 1");
  if (model.factors < 1) throw InputError("portfolio: need >= 1 factor");
  Dataset ds;
  ds.spec = base_spec(Domain::kPortfolio, num_instances, seed);
  ds.spec.stocks = stocks;
  ds.spec.history = history;
  ds.spec.factors = model.factors;
  ds.spec.noise = model.noise;
  ds.generator_version = std::string(kGeneratorVersion);

  // Latent AR(1) factors drive returns through fixed loadings; each stock
  // adds its own AR(1) idiosyncratic term and a constant drift.
  constexpr double kFactorPersistence = 0.6;
  constexpr double kIdioPersistence = 0.3;
  constexpr double kReturnScale = 0.01;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(stocks);
  const auto f = static_cast<Eigen::Index>(model.factors);
  Matrix loadings(d, f);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < f; ++j) loadings(i, j) = normal(rng);
  }
  Vector drift(d);
  for (Eigen::Index i = 0; i < d; ++i) drift(i) = 0.002 * normal(rng);

  const std::size_t steps = kPortfolioBurnIn + history + num_instances;
  Matrix returns(static_cast<Eigen::Index>(steps), d);
  Vector factor = Vector::Zero(f);
  Vector idio = Vector::Zero(d);
  for (std::size_t t = 0; t < steps; ++t) {
    for (Eigen::Index j = 0; j < f; ++j) {
      factor(j) = kFactorPersistence * factor(j) + normal(rng);
    }
    for (Eigen::Index i = 0; i < d; ++i) {
      idio(i) = kIdioPersistence * idio(i) + model.noise * normal(rng);
    }
    returns.row(static_cast<Eigen::Index>(t)) =
        (drift + kReturnScale * (loadings * factor + idio)).transpose();
  }

  // Correlation of the post-burn-in series.
  const Matrix used = returns.bottomRows(
      static_cast<Eigen::Index>(history + num_instances));
  const Matrix centered = used.rowwise() - used.colwise().mean();
  Matrix cov = centered.transpose() * centered /
               std::max<double>(1.0, static_cast<double>(used.rows() - 1));
  Matrix corr(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double denom = std::sqrt(cov(i, i) * cov(j, j));
      corr(i, j) = i == j ? 1.0 : (denom > 0.0 ? cov(i, j) / denom : 0.0);
    }
  }
  double shift = 0.0;
  Matrix q = project_psd(corr, &shift);
  if (shift > kMaxPsdShift) {
    throw GenerationError("portfolio: PSD projection moved an eigenvalue by " +
                          std::to_string(shift));
  }
  ds.covariance = std::move(q);

  for (std::size_t i = 0; i < num_instances; ++i) {
    const auto label_row =
        static_cast<Eigen::Index>(kPortfolioBurnIn + history + i);
    PtoInstance inst;
    inst.id = i;  // time order
    inst.labels = returns.row(label_row).transpose();
    for (Eigen::Index s = 0; s < d; ++s) {
      Vector past(static_cast<Eigen::Index>(history));
      for (Eigen::Index h = 0; h < past.size(); ++h) {
        past(h) = returns(label_row - past.size() + h, s);
      }
      inst.features.push_back(std::move(past));
    }
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

DatasetSpec default_spec(Domain domain, std::size_t num_instances,
                         std::uint64_t seed) {
  DatasetSpec spec = base_spec(domain, num_instances, seed);
  spec.k = domain == Domain::kWebAdv ? 2 : 1;
  return spec;
}

Dataset generate(const DatasetSpec& spec) {
  Dataset ds;
  switch (spec.domain) {
    case Domain::kCubic:
    case Domain::kCubicHard:
      ds = gen_cubic(spec.num_instances, spec.resources,
                     spec.domain == Domain::kCubic ? CubicVariant::kStandard
                                                   : CubicVariant::kHard,
                     spec.seed);
      break;
    case Domain::kWebAdv:
      ds = gen_webadv(spec.num_instances, spec.users, spec.sites, spec.seed,
                      spec.ctr_beta_a, spec.ctr_beta_b, spec.zero_ctr);
      break;
    case Domain::kPortfolio:
      ds = gen_portfolio(spec.num_instances, spec.stocks, spec.history,
                         spec.seed, {spec.factors, spec.noise});
      break;
  }
  ds.spec = spec;
  return ds;
}

SplitMode default_split_mode(Domain domain) {
  return domain == Domain::kPortfolio ? SplitMode::kTemporal : SplitMode::kIid;
}

Dataset split_dataset(Dataset dataset, const SplitFractions& fractions,
                      SplitMode mode, std::uint64_t seed) {
  fractions.validate();
  const std::size_t n = dataset.instances.size();
  const std::size_t nonzero = (fractions.train > 0.0) +
                              (fractions.validation > 0.0) +
                              (fractions.test > 0.0);
  if (n < nonzero) {
    throw InputError("split: " + std::to_string(n) +
                     " instances cannot fill " + std::to_string(nonzero) +
                     " splits");
  }
  const auto count = [](double f, std::size_t total, bool half_up) {
    const double raw = f * static_cast<double>(total);
    return static_cast<std::size_t>(
        std::floor(half_up ? raw + 0.5 + 1e-9 : raw + 1e-9));
  };
  const std::size_t n_train = std::min(n, count(fractions.train, n, true));
  const std::size_t n_val =
      std::min(n - n_train, count(fractions.validation, n, false));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (mode == SplitMode::kIid) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return dataset.instances[a].id <
                              dataset.instances[b].id;
                     });
  }
  for (std::size_t r = 0; r < n; ++r) {
    dataset.instances[order[r]].split =
        r < n_train ? Split::kTrain
                    : (r < n_train + n_val ? Split::kValidation : Split::kTest);
  }
  dataset.spec.fractions = fractions;
  return dataset;
}

std::shared_ptr<const DecisionProblem> make_problem(const Dataset& dataset) {
  const auto& spec = dataset.spec;
  switch (spec.domain) {
    case Domain::kCubic:
    case Domain::kCubicHard:
      return std::make_shared<TopKProblem>(spec.resources, spec.k);
    case Domain::kWebAdv:
      return std::make_shared<WebAdvertisingProblem>(spec.sites, spec.users,
                                                     spec.k);
    case Domain::kPortfolio:
      if (!dataset.covariance) {
        throw InputError("portfolio dataset has no correlation matrix");
      }
      return std::make_shared<PortfolioProblem>(*dataset.covariance,
                                                spec.risk_aversion);
  }
  throw ConfigError("unknown domain");
}

}  // namespace egl
