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
#include <string>
#include <vector>

namespace kwsv::nn {

struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const noexcept { return height * width * channels; }
  std::string str() const {
    return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense float32 activation tensor in row-major (height, width, channel) order.
struct Tensor {
  Shape shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(Shape s, float fill = 0.0f) : shape(s), data(s.size(), fill) {}
  Tensor(Shape s, std::vector<float> values) : shape(s), data(std::move(values)) {}

  std::size_t index(std::size_t y, std::size_t x, std::size_t c) const {
    return (y * shape.width + x) * shape.channels + c;
  }
  float& at(std::size_t y, std::size_t x, std::size_t c) { return data[index(y, x, c)]; }
  float at(std::size_t y, std::size_t x, std::size_t c) const { return data[index(y, x, c)]; }
  std::size_t size() const noexcept { return data.size(); }
};

}  // namespace kwsv::nn
