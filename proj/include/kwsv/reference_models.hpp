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

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "kwsv/bundle.hpp"
#include "kwsv/stream_config.hpp"

namespace kwsv::nn {

struct Architecture {
  std::string name;
  Shape input;
  std::vector<LayerSpec> layers;
};

/// Keyword classifier: two conv/max-pool blocks, flatten, 3-way softmax.
inline Architecture ks_architecture(const StreamConfig& cfg = StreamConfig::reference()) {
  return {"keyword-spotter",
          {cfg.num_mel_bins, frame_count(cfg), 1},
          {LayerSpec::conv(8, 20, 16, 2), LayerSpec::maxpool(2), LayerSpec::conv(4, 10, 32, 1),
           LayerSpec::maxpool(2), LayerSpec::flatten(), LayerSpec::dense(3, Activation::Softmax)}};
}

/// d-vector extractor: batch norm, four convolutions with two max-pools,
/// flatten. The third convolution runs at stride 2, which is what yields a
/// 3x4x32 activation and a 256-wide d-vector on a 40x49 input.
inline Architecture dvector_architecture(const StreamConfig& cfg = StreamConfig::reference()) {
  return {"dvector-extractor",
          {cfg.num_mel_bins, frame_count(cfg), 1},
          {LayerSpec::batchnorm(), LayerSpec::conv(3, 3, 8, 1), LayerSpec::maxpool(3),
           LayerSpec::conv(3, 3, 16, 1), LayerSpec::maxpool(2), LayerSpec::conv(3, 3, 32, 2),
           LayerSpec::conv(3, 3, 64, 2), LayerSpec::flatten()}};
}

/// Builds a bundle for `arch` with He-uniform random weights, zero biases and
/// identity batch norm. Declared counts are filled from the specs.
inline WeightBundle make_random_bundle(const Architecture& arch, std::uint64_t seed,
                                       const nlohmann::json& front_end = nullptr) {
  std::mt19937_64 rng(seed);
  WeightBundle b;
  b.name = arch.name;
  b.front_end = front_end;
  b.input_shape = arch.input;
  b.metadata = {{"init", "he-uniform"}, {"seed", seed}};
  Shape cur = arch.input;
  for (const LayerSpec& spec : arch.layers) {
    Layer l;
    l.spec = spec;
    if (spec.kind == LayerKind::BatchNorm) {
      l.weights = {1.0f, 0.0f, 0.0f, 1.0f};
    } else if (spec.kind == LayerKind::Conv2D || spec.kind == LayerKind::Dense) {
      const std::size_t fan_in =
          spec.kind == LayerKind::Conv2D ? spec.rows * spec.cols * cur.channels : cur.size();
      const std::size_t outs = spec.kind == LayerKind::Conv2D ? spec.filters : spec.units;
      const float limit = static_cast<float>(std::sqrt(6.0 / static_cast<double>(fan_in)));
      std::uniform_real_distribution<float> dist(-limit, limit);
      l.weights.resize(weight_count(spec, cur) - outs);
      for (float& w : l.weights) w = dist(rng);
      l.bias.assign(outs, 0.0f);
    }
    cur = nn::output_shape(spec, cur);
    b.layers.push_back(std::move(l));
  }
  declare_counts(b);
  return b;
}

}  // namespace kwsv::nn
