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
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kwsv/error.hpp"
#include "kwsv/layers.hpp"
#include "kwsv/tensor.hpp"

namespace kwsv::nn {

/// One layer of a bundle: its spec, parameter tensors and declared counts.
///
/// Tensor roles by kind:
///   conv2d    weights = kernel (r, q, c_in, m), bias = (m)
///   dense     weights = (in, a),                bias = (a)
///   batchnorm weights = {gamma, beta, mean, variance}
struct Layer {
  LayerSpec spec;
  std::vector<float> weights;
  std::vector<float> bias;
  std::size_t declared_omega = 0;
  std::size_t declared_alpha = 0;
};

inline constexpr int kBundleFormatVersion = 1;

/// A complete network. Immutable after load; safe to share across threads.
struct WeightBundle {
  int format_version = kBundleFormatVersion;
  std::string name;
  nlohmann::json front_end;  // null when the network is not tied to a front-end
  Shape input_shape;
  std::vector<Layer> layers;
  std::size_t declared_omega_total = 0;
  std::size_t declared_alpha_total = 0;
  nlohmann::json metadata = nlohmann::json::object();

  Shape output_shape() const;
};

struct LayerCount {
  std::string label;
  std::string hyperparameters;
  Shape output;
  std::size_t omega = 0;
  std::size_t alpha = 0;
};

/// Per-row parameter/activation counts. The first row is the network input
/// (α = input size, ω = 0); totals are sums over all rows.
struct CountReport {
  std::vector<LayerCount> rows;
  std::size_t omega_total = 0;
  std::size_t alpha_total = 0;
};

inline std::string hyperparameter_text(const LayerSpec& s) {
  std::ostringstream o;
  switch (s.kind) {
    case LayerKind::Conv2D:
      o << "r=" << s.rows << ", q=" << s.cols << ", m=" << s.filters << ", s=" << s.stride;
      break;
    case LayerKind::MaxPool2D: o << s.pool << "x" << s.pool; break;
    case LayerKind::Dense: o << "a = " << s.units; break;
    default: o << "-";
  }
  return o.str();
}

inline std::string row_label(LayerKind k) {
  switch (k) {
    case LayerKind::BatchNorm: return "BatchNorm";
    case LayerKind::Conv2D: return "Conv2D";
    case LayerKind::MaxPool2D: return "MP 2D";
    case LayerKind::Flatten: return "Flatten";
    case LayerKind::Dense: return "Dense";
  }
  return "?";
}

/// Counts derived from the layer specs alone (ignores declared values).
inline CountReport compute_counts(const Shape& input, const std::vector<LayerSpec>& specs) {
  CountReport r;
  r.rows.push_back({"Input", "-", input, 0, input.size()});
  Shape cur = input;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Shape next;
    try {
      next = output_shape(specs[i], cur);
    } catch (const ShapeError& e) {
      throw ShapeError(e.what(), static_cast<int>(i));
    }
    r.rows.push_back({row_label(specs[i].kind), hyperparameter_text(specs[i]), next,
                      weight_count(specs[i], cur), next.size()});
    cur = next;
  }
  for (const auto& row : r.rows) {
    r.omega_total += row.omega;
    r.alpha_total += row.alpha;
  }
  return r;
}

inline std::vector<LayerSpec> specs_of(const WeightBundle& b) {
  std::vector<LayerSpec> s;
  s.reserve(b.layers.size());
  for (const auto& l : b.layers) s.push_back(l.spec);
  return s;
}

inline Shape WeightBundle::output_shape() const {
  return compute_counts(input_shape, specs_of(*this)).rows.back().output;
}

/// Checks declared counts and tensor sizes against the specs and returns the
/// per-layer table. Throws IntegrityError naming the first offending layer.
inline CountReport count_params(const WeightBundle& b) {
  CountReport r = compute_counts(b.input_shape, specs_of(b));
  for (std::size_t i = 0; i < b.layers.size(); ++i) {
    const Layer& l = b.layers[i];
    const LayerCount& row = r.rows[i + 1];
    const std::string where = "layer " + std::to_string(i) + " (" + to_string(l.spec.kind) + ")";
    if (l.weights.size() + l.bias.size() != row.omega)
      throw IntegrityError(where + ": holds " + std::to_string(l.weights.size() + l.bias.size()) +
                           " parameters, spec implies " + std::to_string(row.omega));
    if (l.declared_omega != row.omega)
      throw IntegrityError(where + ": declared omega " + std::to_string(l.declared_omega) +
                           " != computed " + std::to_string(row.omega));
    if (l.declared_alpha != row.alpha)
      throw IntegrityError(where + ": declared alpha " + std::to_string(l.declared_alpha) +
                           " != computed " + std::to_string(row.alpha));
  }
  if (b.declared_omega_total != r.omega_total)
    throw IntegrityError("declared omega total " + std::to_string(b.declared_omega_total) +
                         " != sum of layers " + std::to_string(r.omega_total));
  if (b.declared_alpha_total != r.alpha_total)
    throw IntegrityError("declared alpha total " + std::to_string(b.declared_alpha_total) +
                         " != sum of layers " + std::to_string(r.alpha_total));
  return r;
}

/// Fills every declared count from the specs. Used by bundle writers.
inline void declare_counts(WeightBundle& b) {
  const CountReport r = compute_counts(b.input_shape, specs_of(b));
  for (std::size_t i = 0; i < b.layers.size(); ++i) {
    b.layers[i].declared_omega = r.rows[i + 1].omega;
    b.layers[i].declared_alpha = r.rows[i + 1].alpha;
  }
  b.declared_omega_total = r.omega_total;
  b.declared_alpha_total = r.alpha_total;
}

inline Tensor apply_layer(const Layer& l, Tensor x) {
  switch (l.spec.kind) {
    case LayerKind::BatchNorm:
      if (l.weights.size() != 4) throw ShapeError("batchnorm expects 4 parameters");
      return batchnorm(std::move(x), l.weights[0], l.weights[1], l.weights[2], l.weights[3]);
    case LayerKind::Conv2D: return conv2d(x, l.spec, l.weights, l.bias);
    case LayerKind::MaxPool2D: return maxpool2d(x, l.spec.pool);
    case LayerKind::Flatten: return flatten(std::move(x));
    case LayerKind::Dense: return dense(x, l.spec, l.weights, l.bias);
  }
  throw ShapeError("unknown layer kind");
}

struct RunStats {
  std::size_t peak_activation_bytes = 0;  // largest input+output pair alive at once
};

/// Runs all layers in order and returns the flattened final activation.
/// Only the current layer's input and output are alive at any point.
inline std::vector<float> run_network(const WeightBundle& b, Tensor input, RunStats* stats = nullptr) {
  if (input.shape != b.input_shape)
    throw ShapeError("input " + input.shape.str() + " does not match bundle input " +
                     b.input_shape.str());
  std::size_t peak = input.size();
  for (std::size_t i = 0; i < b.layers.size(); ++i) {
    const std::size_t in_size = input.size();
    try {
      input = apply_layer(b.layers[i], std::move(input));
    } catch (const ShapeError& e) {
      throw ShapeError(e.what(), static_cast<int>(i));
    }
    const bool in_place = b.layers[i].spec.kind == LayerKind::BatchNorm ||
                          b.layers[i].spec.kind == LayerKind::Flatten;
    peak = std::max(peak, in_place ? input.size() : in_size + input.size());
    for (float v : input.data)
      if (!std::isfinite(v))
        throw Error("layer " + std::to_string(i) + ": non-finite activation");
  }
  if (stats) stats->peak_activation_bytes = peak * sizeof(float);
  return std::move(input.data);
}

inline std::string thousands(std::size_t v) {
  std::string s = std::to_string(v);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

/// Renders the layer table (hyperparameters, α, ω, totals).
inline std::string format_layer_table(const CountReport& r, const std::string& title = "") {
  std::ostringstream o;
  std::size_t hw = 15;
  for (const auto& row : r.rows) hw = std::max(hw, row.hyperparameters.size());
  const auto line = [&] { o << std::string(12 + hw + 2 + 12 + 12, '-') << '\n'; };
  if (!title.empty()) o << title << '\n';
  line();
  o << std::left << std::setw(12) << "l" << std::setw(static_cast<int>(hw) + 2) << "Hyperparameters"
    << std::right << std::setw(12) << "alpha" << std::setw(12) << "omega" << '\n';
  line();
  for (const auto& row : r.rows)
    o << std::left << std::setw(12) << row.label << std::setw(static_cast<int>(hw) + 2)
      << row.hyperparameters << std::right << std::setw(12) << thousands(row.alpha)
      << std::setw(12) << thousands(row.omega) << '\n';
  line();
  o << std::left << std::setw(12) << "Tot." << std::setw(static_cast<int>(hw) + 2) << ""
    << std::right << std::setw(12) << thousands(r.alpha_total) << std::setw(12)
    << thousands(r.omega_total) << '\n';
  return o.str();
}

}  // namespace kwsv::nn
