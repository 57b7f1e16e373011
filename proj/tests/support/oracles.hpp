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

// Independent test-only oracles. Nothing here calls the library solvers or
// loss code; each routine is a direct restatement of a definition.

#ifndef EGL_TESTS_ORACLES_HPP_
#define EGL_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace egl::oracle {

// All size-k subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<std::size_t>> subsets(std::size_t n,
                                                     std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

// Sum of the chosen labels.
inline double topk_value(const std::vector<std::size_t>& chosen,
                         const Eigen::VectorXd& y) {
  double v = 0.0;
  for (auto i : chosen) v += y(static_cast<Eigen::Index>(i));
  return v;
}

// Expected clicks with CTRs clamped to [0, 1]; rows are sites.
inline double webadv_value(const std::vector<std::size_t>& sites,
                           const Eigen::VectorXd& ctr, std::size_t users) {
  double total = 0.0;
  for (std::size_t j = 0; j < users; ++j) {
    double miss = 1.0;
    for (auto m : sites) {
      const double p = std::clamp(
          ctr(static_cast<Eigen::Index>(m * users + j)), 0.0, 1.0);
      miss *= 1.0 - p;
    }
    total += 1.0 - miss;
  }
  return total;
}

// Best value over every size-k subset.
template <class Value>
double best_subset_value(std::size_t n, std::size_t k, Value value) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : subsets(n, k)) best = std::max(best, value(s));
  return best;
}

inline double portfolio_value(const Eigen::VectorXd& z,
                              const Eigen::VectorXd& y,
                              const Eigen::MatrixXd& q, double lambda) {
  return z.dot(y) - lambda * z.dot(q * z);
}

// Max of the portfolio objective over the D=3 simplex grid with `step`.
inline double simplex_grid_max(const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& q, double lambda,
                               double step) {
  const int n = static_cast<int>(std::lround(1.0 / step));
  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd z(3);
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; a + b <= n; ++b) {
      z << a * step, b * step, (n - a - b) * step;
      best = std::max(best, portfolio_value(z, y, q, lambda));
    }
  }
  return best;
}

// Golden-section minimizer of a unimodal function on [lo, hi].
inline double golden_section_min(const std::function<double(double)>& f,
                                 double lo, double hi, double tol = 1e-12) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Central differences of a scalar function of a vector.
inline Eigen::VectorXd central_difference(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd p = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = p(i);
    p(i) = keep + h;
    const double up = f(p);
    p(i) = keep - h;
    const double down = f(p);
    p(i) = keep;
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

// Max relative error with an absolute floor for near-zero entries.
inline double relative_error(const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b, double floor = 1e-6) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a(i)), std::abs(b(i)), floor});
    worst = std::max(worst, std::abs(a(i) - b(i)) / scale);
  }
  return worst;
}

// Least-squares scalar weight for regret ~ w |d|^2.
inline double closed_form_weight(const std::vector<double>& sq_dist,
                                 const std::vector<double>& regret) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < sq_dist.size(); ++i) {
    num += regret[i] * sq_dist[i];
    den += sq_dist[i] * sq_dist[i];
  }
  return num / den;
}

}  // namespace egl::oracle

#endif  // EGL_TESTS_ORACLES_HPP_
