// Copyright 2026 The vepm Authors.
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

#ifndef VEPM_ERROR_HPP_
#define VEPM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace vepm {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad feature values, mismatched dimensions, bad ranges.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its sweep cap before reaching tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

/// Empirical model estimation without enough data for some (state, action).
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Invalid or unsolvable environment / experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace vepm

#endif  // VEPM_ERROR_HPP_
