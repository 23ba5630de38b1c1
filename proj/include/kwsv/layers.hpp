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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "kwsv/error.hpp"
#include "kwsv/tensor.hpp"

namespace kwsv::nn {

enum class LayerKind { BatchNorm, Conv2D, MaxPool2D, Flatten, Dense };
enum class Padding { Same, Valid };
enum class Activation { None, Relu, Softmax };

inline constexpr float kBatchNormEpsilon = 1e-3f;

/// Hyperparameters of one layer. Only the fields relevant to `kind` are used.
struct LayerSpec {
  LayerKind kind = LayerKind::Flatten;
  std::size_t rows = 0;     // r
  std::size_t cols = 0;     // q
  std::size_t filters = 0;  // m
  std::size_t stride = 1;   // s
  Padding padding = Padding::Same;
  std::size_t pool = 0;
  std::size_t units = 0;    // a
  Activation activation = Activation::None;

  static LayerSpec batchnorm() { return {.kind = LayerKind::BatchNorm}; }
  static LayerSpec conv(std::size_t r, std::size_t q, std::size_t m, std::size_t s,
                        Padding pad = Padding::Same, Activation act = Activation::Relu) {
    return {.kind = LayerKind::Conv2D, .rows = r, .cols = q, .filters = m, .stride = s,
            .padding = pad, .activation = act};
  }
  static LayerSpec maxpool(std::size_t p) { return {.kind = LayerKind::MaxPool2D, .pool = p}; }
  static LayerSpec flatten() { return {.kind = LayerKind::Flatten}; }
  static LayerSpec dense(std::size_t a, Activation act = Activation::None) {
    return {.kind = LayerKind::Dense, .units = a, .activation = act};
  }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::Conv2D: return "conv2d";
    case LayerKind::MaxPool2D: return "maxpool2d";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Dense: return "dense";
  }
  return "?";
}
inline const char* to_string(Padding p) { return p == Padding::Same ? "same" : "valid"; }
inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::None: return "none";
    case Activation::Relu: return "relu";
    case Activation::Softmax: return "softmax";
  }
  return "?";
}

inline LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "batchnorm") return LayerKind::BatchNorm;
  if (s == "conv2d") return LayerKind::Conv2D;
  if (s == "maxpool2d") return LayerKind::MaxPool2D;
  if (s == "flatten") return LayerKind::Flatten;
  if (s == "dense") return LayerKind::Dense;
  throw FormatError("unknown layer kind '" + s + "'");
}
inline Padding padding_from_string(const std::string& s) {
  if (s == "same") return Padding::Same;
  if (s == "valid") return Padding::Valid;
  throw FormatError("unknown padding '" + s + "'");
}
inline Activation activation_from_string(const std::string& s) {
  if (s == "none") return Activation::None;
  if (s == "relu") return Activation::Relu;
  if (s == "softmax") return Activation::Softmax;
  throw FormatError("unknown activation '" + s + "'");
}

/// Output spatial extent of a strided window: ceil(in/s) for same padding,
/// floor((in-k)/s)+1 for valid padding.
inline std::size_t conv_extent(std::size_t in, std::size_t k, std::size_t s, Padding pad) {
  if (pad == Padding::Same) return (in + s - 1) / s;
  if (in < k) throw ShapeError("kernel " + std::to_string(k) + " larger than input " + std::to_string(in));
  return (in - k) / s + 1;
}

/// Output shape of `spec` applied to `in`; throws ShapeError on misfit.
inline Shape output_shape(const LayerSpec& spec, const Shape& in) {
  switch (spec.kind) {
    case LayerKind::BatchNorm:
      return in;
    case LayerKind::Conv2D:
      if (spec.rows == 0 || spec.cols == 0 || spec.filters == 0 || spec.stride == 0)
        throw ShapeError("conv2d hyperparameters must be positive");
      return {conv_extent(in.height, spec.rows, spec.stride, spec.padding),
              conv_extent(in.width, spec.cols, spec.stride, spec.padding), spec.filters};
    case LayerKind::MaxPool2D:
      if (spec.pool == 0) throw ShapeError("pool size must be positive");
      if (spec.pool > in.height || spec.pool > in.width)
        throw ShapeError("pool " + std::to_string(spec.pool) + " larger than input " + in.str());
      return {in.height / spec.pool, in.width / spec.pool, in.channels};
    case LayerKind::Flatten:
      return {1, 1, in.size()};
    case LayerKind::Dense:
      if (spec.units == 0) throw ShapeError("dense units must be positive");
      return {1, 1, spec.units};
  }
  throw ShapeError("unknown layer kind");
}

/// Number of stored parameters ω of `spec` given its input shape.
inline std::size_t weight_count(const LayerSpec& spec, const Shape& in) {
  switch (spec.kind) {
    case LayerKind::BatchNorm: return 4;
    case LayerKind::Conv2D: return spec.rows * spec.cols * in.channels * spec.filters + spec.filters;
    case LayerKind::Dense: return in.size() * spec.units + spec.units;
    case LayerKind::MaxPool2D:
    case LayerKind::Flatten: return 0;
  }
  return 0;
}

inline void relu_inplace(std::span<float> v) {
  for (float& x : v) x = std::max(x, 0.0f);
}

inline void softmax_inplace(std::span<float> v) {
  if (v.empty()) return;
  const float mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (float& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (float& x : v) x = static_cast<float>(x / sum);
}

inline void apply_activation(Activation a, std::span<float> v) {
  if (a == Activation::Relu) relu_inplace(v);
  else if (a == Activation::Softmax) softmax_inplace(v);
}

/// 2D cross-correlation. Kernel layout is (row, col, in_channel, out_channel).
inline Tensor conv2d(const Tensor& input, const LayerSpec& spec, std::span<const float> kernel,
                     std::span<const float> bias) {
  const Shape in = input.shape;
  const Shape out_shape = output_shape(spec, in);
  const std::size_t r = spec.rows, q = spec.cols, cin = in.channels, m = spec.filters;
  if (kernel.size() != r * q * cin * m)
    throw ShapeError("conv2d kernel has " + std::to_string(kernel.size()) + " values, expected " +
                     std::to_string(r * q * cin * m) + " for input " + in.str());
  if (bias.size() != m) throw ShapeError("conv2d bias length mismatch");

  std::ptrdiff_t pad_top = 0, pad_left = 0;
  if (spec.padding == Padding::Same) {
    const auto total = [&](std::size_t o, std::size_t k, std::size_t i) {
      const std::ptrdiff_t need = static_cast<std::ptrdiff_t>((o - 1) * spec.stride + k) -
                                  static_cast<std::ptrdiff_t>(i);
      return std::max<std::ptrdiff_t>(need, 0);
    };
    pad_top = total(out_shape.height, r, in.height) / 2;
    pad_left = total(out_shape.width, q, in.width) / 2;
  }

  Tensor out(out_shape);
  for (std::size_t oy = 0; oy < out_shape.height; ++oy) {
    for (std::size_t ox = 0; ox < out_shape.width; ++ox) {
      float* dst = &out.data[out.index(oy, ox, 0)];
      for (std::size_t f = 0; f < m; ++f) dst[f] = bias[f];
      const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * spec.stride) - pad_top;
      const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * spec.stride) - pad_left;
      for (std::size_t ky = 0; ky < r; ++ky) {
        const std::ptrdiff_t y = y0 + static_cast<std::ptrdiff_t>(ky);
        if (y < 0 || y >= static_cast<std::ptrdiff_t>(in.height)) continue;
        for (std::size_t kx = 0; kx < q; ++kx) {
          const std::ptrdiff_t x = x0 + static_cast<std::ptrdiff_t>(kx);
          if (x < 0 || x >= static_cast<std::ptrdiff_t>(in.width)) continue;
          const float* src = &input.data[input.index(static_cast<std::size_t>(y),
                                                     static_cast<std::size_t>(x), 0)];
          const float* w = &kernel[((ky * q + kx) * cin) * m];
          for (std::size_t c = 0; c < cin; ++c) {
            const float v = src[c];
            const float* wc = w + c * m;
            for (std::size_t f = 0; f < m; ++f) dst[f] += v * wc[f];
          }
        }
      }
    }
  }
  apply_activation(spec.activation, out.data);
  return out;
}

/// Non-overlapping max pooling with stride == pool; trailing rows/columns
/// that do not fill a pool window are discarded.
inline Tensor maxpool2d(const Tensor& input, std::size_t pool) {
  const Shape out_shape = output_shape(LayerSpec::maxpool(pool), input.shape);
  Tensor out(out_shape, -std::numeric_limits<float>::infinity());
  for (std::size_t oy = 0; oy < out_shape.height; ++oy)
    for (std::size_t ox = 0; ox < out_shape.width; ++ox)
      for (std::size_t dy = 0; dy < pool; ++dy)
        for (std::size_t dx = 0; dx < pool; ++dx)
          for (std::size_t c = 0; c < out_shape.channels; ++c) {
            float& o = out.at(oy, ox, c);
            o = std::max(o, input.at(oy * pool + dy, ox * pool + dx, c));
          }
  return out;
}

inline Tensor flatten(Tensor input) {
  input.shape = {1, 1, input.data.size()};
  return input;
}

/// Fully connected layer over the flattened input. Weight layout is (in, units).
inline Tensor dense(const Tensor& input, const LayerSpec& spec, std::span<const float> weights,
                    std::span<const float> bias) {
  const std::size_t n = input.size(), a = spec.units;
  if (a == 0) throw ShapeError("dense units must be positive");
  if (weights.size() != n * a)
    throw ShapeError("dense weights have " + std::to_string(weights.size()) + " values, expected " +
                     std::to_string(n * a));
  if (bias.size() != a) throw ShapeError("dense bias length mismatch");
  Tensor out(Shape{1, 1, a});
  for (std::size_t j = 0; j < a; ++j) out.data[j] = bias[j];
  for (std::size_t i = 0; i < n; ++i) {
    const float v = input.data[i];
    const float* w = &weights[i * a];
    for (std::size_t j = 0; j < a; ++j) out.data[j] += v * w[j];
  }
  apply_activation(spec.activation, out.data);
  return out;
}

/// Inference-time batch normalization with a single parameter group:
/// (x - mean) / sqrt(var + eps) * gamma + beta.
inline Tensor batchnorm(Tensor input, float gamma, float beta, float mean, float variance,
                        float eps = kBatchNormEpsilon) {
  if (!(variance >= 0.0f)) throw Error("batchnorm variance must be non-negative");
  const float scale = gamma / std::sqrt(variance + eps);
  for (float& x : input.data) x = (x - mean) * scale + beta;
  return input;
}

}  // namespace kwsv::nn
