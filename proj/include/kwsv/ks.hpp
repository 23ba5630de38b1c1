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

#include <array>
#include <cstddef>
#include <string>

#include "kwsv/bundle.hpp"
#include "kwsv/error.hpp"
#include "kwsv/mfcc.hpp"

namespace kwsv {

/// Output index order of the keyword network.
enum class KsClass { Silence = 0, Unknown = 1, Keyword = 2 };

inline const char* to_string(KsClass c) {
  switch (c) {
    case KsClass::Silence: return "silence";
    case KsClass::Unknown: return "unknown";
    case KsClass::Keyword: return "keyword";
  }
  return "?";
}

struct KsDecision {
  int y = 0;  // 1 iff the keyword is present
  KsClass cls = KsClass::Silence;
  std::array<float, 3> scores{};
};

/// Argmax over the three class scores; ties go to the lowest index.
inline KsDecision decide_keyword(const std::array<float, 3>& scores) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  KsDecision d;
  d.cls = static_cast<KsClass>(best);
  d.y = d.cls == KsClass::Keyword ? 1 : 0;
  d.scores = scores;
  return d;
}

/// Throws FingerprintMismatch unless `bundle` was built for the front-end that
/// produced `spec`. Bundles without a recorded front-end only get a shape check.
inline void check_front_end(const nn::WeightBundle& bundle, const Spectrogram& spec) {
  if (!bundle.front_end.is_null() && bundle.front_end != front_end_fingerprint(spec.config))
    throw FingerprintMismatch("bundle '" + bundle.name +
                              "' was built for a different front-end configuration");
  const nn::Shape in{spec.bins, spec.frames, 1};
  if (in != bundle.input_shape)
    throw FingerprintMismatch("spectrogram " + in.str() + " does not match bundle input " +
                              bundle.input_shape.str());
}

inline nn::Tensor to_tensor(const Spectrogram& spec) {
  return nn::Tensor(nn::Shape{spec.bins, spec.frames, 1}, spec.coefficients);
}

inline KsDecision ks_classify(const nn::WeightBundle& bundle, const Spectrogram& spec) {
  check_front_end(bundle, spec);
  const auto out = nn::run_network(bundle, to_tensor(spec));
  if (out.size() != 3)
    throw ShapeError("keyword network produced " + std::to_string(out.size()) + " outputs, expected 3");
  return decide_keyword({out[0], out[1], out[2]});
}

/// Keyword gate backed by a weight bundle.
class KeywordSpotter {
 public:
  explicit KeywordSpotter(nn::WeightBundle bundle) : bundle_(std::move(bundle)) {
    if (bundle_.output_shape().size() != 3)
      throw ShapeError("keyword bundle must have 3 outputs");
  }
  KsDecision classify(const Spectrogram& spec) const { return ks_classify(bundle_, spec); }
  const nn::WeightBundle& bundle() const noexcept { return bundle_; }

 private:
  nn::WeightBundle bundle_;
};

}  // namespace kwsv
