/* Copyright 2026 The lipaug Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace lipaug {

// Argument outside the mathematical domain of an operation (negative norm
// argument, nonpositive threshold, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Incompatible matrix/vector dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite entry where a finite one is required.
class NonFiniteError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Misuse of an API (unknown node, releasing an input, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bound evaluation requires a strictly positive margin.
class MarginError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The ReLU variant requires strictly positive pre-activation margins.
class PreactivationMarginError : public MarginError {
 public:
  PreactivationMarginError(const std::string& what, int layer)
      : MarginError(what), layer_(layer) {}
  int layer() const { return layer_; }

 private:
  int layer_;
};

// Power iteration did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_estimate)
      : std::runtime_error(what), last_estimate_(last_estimate) {}
  double last_estimate() const { return last_estimate_; }

 private:
  double last_estimate_;
};

// Division by a zero threshold inside a closed-form constant.
class DivisionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Unreadable or malformed file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lipaug
