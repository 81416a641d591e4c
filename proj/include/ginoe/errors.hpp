/*
 * Copyright 2026 The ginoe-lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ginoe {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates a documented precondition (odd dimension, unordered points, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be nonsingular is (numerically) rank deficient.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// A spin variable was requested exactly at an eigenvalue.
class DegenerateSpinError : public Error {
 public:
  using Error::Error;
};

/// A product of determinants left the representable double range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// A Monte Carlo request cannot populate the requested bins.
class InsufficientSamplesError : public Error {
 public:
  InsufficientSamplesError(const std::string& what, std::uint64_t required)
      : Error(what), required_samples_(required) {}

  std::uint64_t required_samples() const noexcept { return required_samples_; }

 private:
  std::uint64_t required_samples_;
};

}  // namespace ginoe
