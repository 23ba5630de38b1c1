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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kwsv/bundle.hpp"
#include "kwsv/error.hpp"

// .twb container layout:
//
//   bytes 0..3   magic "TWB1"
//   bytes 4..7   header length H, uint32 little-endian
//   bytes 8..8+H UTF-8 JSON header (layer specs, counts, front-end, offsets)
//   then         tensor blob: little-endian float32 values; header offsets
//                are byte offsets from the start of the blob
namespace kwsv::nn {

inline constexpr char kBundleMagic[4] = {'T', 'W', 'B', '1'};

namespace detail {

inline void append_floats(std::string& blob, std::span<const float> v) {
  for (float f : v) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) blob.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

inline std::vector<float> read_floats(std::span<const unsigned char> blob, std::size_t offset,
                                      std::size_t count) {
  if (offset % 4 != 0 || offset > blob.size() || count > (blob.size() - offset) / 4)
    throw FormatError("tensor range outside blob");
  std::vector<float> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* p = blob.data() + offset + 4 * i;
    const std::uint32_t bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                               std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

inline nlohmann::json shape_json(const Shape& s) { return {s.height, s.width, s.channels}; }

inline std::vector<std::size_t> weight_dims(const LayerSpec& s, const Shape& in) {
  switch (s.kind) {
    case LayerKind::Conv2D: return {s.rows, s.cols, in.channels, s.filters};
    case LayerKind::Dense: return {in.size(), s.units};
    case LayerKind::BatchNorm: return {4};
    default: return {};
  }
}

}  // namespace detail

inline nlohmann::json spec_to_json(const LayerSpec& s) {
  nlohmann::json j = {{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case LayerKind::Conv2D:
      j["rows"] = s.rows;
      j["cols"] = s.cols;
      j["filters"] = s.filters;
      j["stride"] = s.stride;
      j["padding"] = to_string(s.padding);
      j["activation"] = to_string(s.activation);
      break;
    case LayerKind::MaxPool2D: j["pool"] = s.pool; break;
    case LayerKind::Dense:
      j["units"] = s.units;
      j["activation"] = to_string(s.activation);
      break;
    default: break;
  }
  return j;
}

inline LayerSpec spec_from_json(const nlohmann::json& j) {
  LayerSpec s;
  s.kind = layer_kind_from_string(j.at("kind").get<std::string>());
  switch (s.kind) {
    case LayerKind::Conv2D:
      s = LayerSpec::conv(j.at("rows"), j.at("cols"), j.at("filters"), j.at("stride"),
                          padding_from_string(j.at("padding")),
                          activation_from_string(j.value("activation", "none")));
      break;
    case LayerKind::MaxPool2D: s.pool = j.at("pool"); break;
    case LayerKind::Dense:
      s = LayerSpec::dense(j.at("units"), activation_from_string(j.value("activation", "none")));
      break;
    default: break;
  }
  return s;
}

inline std::string serialize_bundle(const WeightBundle& b) {
  const CountReport counts = compute_counts(b.input_shape, specs_of(b));
  std::string blob;
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t i = 0; i < b.layers.size(); ++i) {
    const Layer& l = b.layers[i];
    nlohmann::json lj = spec_to_json(l.spec);
    lj["omega"] = l.declared_omega;
    lj["alpha"] = l.declared_alpha;
    lj["output_shape"] = detail::shape_json(counts.rows[i + 1].output);
    nlohmann::json tensors = nlohmann::json::array();
    const auto add = [&](const char* name, std::vector<std::size_t> dims, const std::vector<float>& v) {
      tensors.push_back({{"name", name}, {"shape", dims}, {"offset", blob.size()}, {"count", v.size()}});
      detail::append_floats(blob, v);
    };
    const auto dims = detail::weight_dims(l.spec, counts.rows[i].output);
    if (!l.weights.empty()) add(l.spec.kind == LayerKind::BatchNorm ? "gamma_beta_mean_var" : "kernel", dims, l.weights);
    if (!l.bias.empty()) add("bias", {l.bias.size()}, l.bias);
    lj["tensors"] = std::move(tensors);
    layers.push_back(std::move(lj));
  }
  const nlohmann::json header = {
      {"format_version", b.format_version},
      {"name", b.name},
      {"dtype", "float32-le"},
      {"kernel_layout", "row,col,in_channel,out_channel"},
      {"front_end", b.front_end},
      {"input_shape", detail::shape_json(b.input_shape)},
      {"layers", std::move(layers)},
      {"totals", {{"omega", b.declared_omega_total}, {"alpha", b.declared_alpha_total}}},
      {"metadata", b.metadata},
  };
  const std::string text = header.dump(1);
  std::string out(kBundleMagic, 4);
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
  out += text;
  out += blob;
  return out;
}

/// Parses a .twb image and verifies its declared counts.
inline WeightBundle parse_bundle(std::span<const unsigned char> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kBundleMagic, 4) != 0)
    throw FormatError("not a .twb bundle (bad magic)");
  const std::uint32_t len = std::uint32_t(bytes[4]) | std::uint32_t(bytes[5]) << 8 |
                            std::uint32_t(bytes[6]) << 16 | std::uint32_t(bytes[7]) << 24;
  if (8 + static_cast<std::size_t>(len) > bytes.size()) throw FormatError("truncated bundle header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bundle header: ") + e.what());
  }
  const auto blob = bytes.subspan(8 + len);

  WeightBundle b;
  try {
    b.format_version = h.at("format_version");
    if (b.format_version != kBundleFormatVersion)
      throw FormatError("unsupported bundle format_version " + std::to_string(b.format_version));
    b.name = h.value("name", "");
    b.front_end = h.value("front_end", nlohmann::json());
    const auto& is = h.at("input_shape");
    b.input_shape = {is.at(0), is.at(1), is.at(2)};
    for (const auto& lj : h.at("layers")) {
      Layer l;
      l.spec = spec_from_json(lj);
      l.declared_omega = lj.at("omega");
      l.declared_alpha = lj.at("alpha");
      for (const auto& t : lj.value("tensors", nlohmann::json::array())) {
        auto values = detail::read_floats(blob, t.at("offset"), t.at("count"));
        if (t.at("name") == "bias") l.bias = std::move(values);
        else l.weights = std::move(values);
      }
      b.layers.push_back(std::move(l));
    }
    b.declared_omega_total = h.at("totals").at("omega");
    b.declared_alpha_total = h.at("totals").at("alpha");
    b.metadata = h.value("metadata", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bundle header: ") + e.what());
  }
  count_params(b);
  return b;
}

inline void save_bundle(const WeightBundle& b, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const std::string bytes = serialize_bundle(b);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline WeightBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return parse_bundle(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace kwsv::nn
