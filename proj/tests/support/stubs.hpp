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

// Scriptable stand-ins for the two networks. The gate fires iff the first
// coefficient of the spectrogram is positive; the embedder returns the first
// `dim` coefficients as the d-vector. Both count their invocations.

#include <memory>

#include "kwsv/pipeline.hpp"

namespace stubs {

struct Counter {
  std::shared_ptr<std::size_t> calls = std::make_shared<std::size_t>(0);
};

struct SignGate : Counter {
  kwsv::KsDecision classify(const kwsv::Spectrogram& s) const {
    ++*calls;
    return s.coefficients.at(0) > 0.0f ? kwsv::decide_keyword({0.1f, 0.2f, 0.7f})
                                       : kwsv::decide_keyword({0.7f, 0.2f, 0.1f});
  }
};

struct PrefixEmbedder : Counter {
  std::size_t dim = 4;
  kwsv::DVector embed(const kwsv::Spectrogram& s) const {
    ++*calls;
    return kwsv::DVector{{s.coefficients.begin(), s.coefficients.begin() + static_cast<long>(dim)}};
  }
};

// Spectrogram whose first coefficients are `head` (gate fires iff head[0] > 0).
inline kwsv::Spectrogram spectrogram(std::initializer_list<float> head) {
  kwsv::Spectrogram s{40, 49, std::vector<float>(1960, 0.0f), kwsv::StreamConfig::reference()};
  std::size_t i = 0;
  for (float v : head) s.coefficients[i++] = v;
  return s;
}

}  // namespace stubs
