// Copyright 2026 The kwsv Authors. All rights reserved.
//
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kwsv {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Tensor/layer shape mismatch. Carries the index of the offending layer when
// raised from inside a network (-1 otherwise).
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what, int layer = -1)
      : Error(layer >= 0 ? "layer " + std::to_string(layer) + ": " + what : what),
        layer_(layer) {}
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

// Declared parameter/activation counts disagree with the layer specs.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

// Bundle was built for a different front-end than the data it is fed.
class FingerprintMismatch : public Error {
 public:
  using Error::Error;
};

class OverrunError : public Error {
 public:
  explicit OverrunError(std::size_t dropped)
      : Error("ring buffer overrun: " + std::to_string(dropped) + " samples dropped"),
        dropped_(dropped) {}
  std::size_t dropped() const noexcept { return dropped_; }

 private:
  std::size_t dropped_;
};

class EnrollmentComplete : public Error {
 public:
  using Error::Error;
};

// Cosine similarity against a zero-norm vector.
class UndefinedSimilarity : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace kwsv
