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

#ifndef EGL_ERRORS_HPP_
#define EGL_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace egl {

// Base of every error raised by the library. The CLI maps subclasses to exit
// codes (config: 2, solver: 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape mismatch, non-finite values, invalid arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

// The requested operation is not supported for this input size or kind.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// An iterative solver stopped before certifying optimality.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::size_t iterations, double gap,
              Eigen::VectorXd best_iterate)
      : Error(what),
        iterations_(iterations),
        gap_(gap),
        best_iterate_(std::move(best_iterate)) {}
  explicit SolverError(const std::string& what) : Error(what) {}

  std::size_t iterations() const { return iterations_; }
  double gap() const { return gap_; }
  const Eigen::VectorXd& best_iterate() const { return best_iterate_; }

 private:
  std::size_t iterations_ = 0;
  double gap_ = 0.0;
  Eigen::VectorXd best_iterate_;
};

// |DQ(y,y) - DQ(eps,y)| too small to normalize against.
class DegenerateBaselineError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class FittingError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace egl

#endif  // EGL_ERRORS_HPP_
