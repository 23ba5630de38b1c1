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
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "kwsv/error.hpp"

namespace kwsv::eval {

/// One operating point: accept iff score > threshold.
struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  double tpr = 0.0;
  std::int64_t accepted_genuine = 0;
  std::int64_t accepted_impostor = 0;
};

/// Thresholds strictly decreasing; the last point is at -inf (accept all).
struct RocCurve {
  std::vector<RocPoint> points;
  std::int64_t genuine = 0;
  std::int64_t impostor = 0;
};

/// Error rates at an arbitrary threshold under the rule score > tau.
inline RocPoint operating_point(std::span<const double> genuine, std::span<const double> impostor,
                                double tau) {
  if (genuine.empty() || impostor.empty()) throw Error("operating point needs both score classes");
  RocPoint p;
  p.threshold = tau;
  for (double s : genuine) p.accepted_genuine += s > tau;
  for (double s : impostor) p.accepted_impostor += s > tau;
  const double g = static_cast<double>(genuine.size()), i = static_cast<double>(impostor.size());
  p.tpr = static_cast<double>(p.accepted_genuine) / g;
  p.fnr = static_cast<double>(static_cast<std::int64_t>(genuine.size()) - p.accepted_genuine) / g;
  p.fpr = static_cast<double>(p.accepted_impostor) / i;
  return p;
}

/// Sweeps every distinct score as a threshold (plus a final -inf).
inline RocCurve compute_roc(std::span<const double> genuine, std::span<const double> impostor) {
  if (genuine.empty() || impostor.empty()) throw Error("ROC needs non-empty genuine and impostor scores");
  std::vector<double> g(genuine.begin(), genuine.end()), im(impostor.begin(), impostor.end());
  for (double s : g)
    if (std::isnan(s)) throw Error("NaN genuine score");
  for (double s : im)
    if (std::isnan(s)) throw Error("NaN impostor score");
  std::sort(g.begin(), g.end(), std::greater<>());
  std::sort(im.begin(), im.end(), std::greater<>());
  std::vector<double> thresholds;
  thresholds.reserve(g.size() + im.size() + 1);
  std::merge(g.begin(), g.end(), im.begin(), im.end(), std::back_inserter(thresholds), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(-std::numeric_limits<double>::infinity());

  RocCurve c;
  c.genuine = static_cast<std::int64_t>(g.size());
  c.impostor = static_cast<std::int64_t>(im.size());
  std::size_t gi = 0, ii = 0;
  for (double t : thresholds) {
    while (gi < g.size() && g[gi] > t) ++gi;
    while (ii < im.size() && im[ii] > t) ++ii;
    RocPoint p;
    p.threshold = t;
    p.accepted_genuine = static_cast<std::int64_t>(gi);
    p.accepted_impostor = static_cast<std::int64_t>(ii);
    p.tpr = static_cast<double>(gi) / static_cast<double>(g.size());
    p.fnr = static_cast<double>(g.size() - gi) / static_cast<double>(g.size());
    p.fpr = static_cast<double>(ii) / static_cast<double>(im.size());
    c.points.push_back(p);
  }
  return c;
}

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

namespace detail {
// (FPR - FNR) * genuine * impostor, exact in integers.
inline std::int64_t scaled_gap(const RocCurve& c, const RocPoint& p) {
  return p.accepted_impostor * c.genuine - (c.genuine - p.accepted_genuine) * c.impostor;
}
}  // namespace detail

/// Equal error rate and the ROC threshold closest to it.
///
/// The threshold is the point minimizing |FPR - FNR| (lowest threshold on
/// ties). The rate is read where FPR - FNR changes sign, interpolating
/// linearly between the two adjacent points when no point hits it exactly.
inline EerResult eer_and_threshold(const RocCurve& c) {
  if (c.points.empty()) throw Error("empty ROC curve");
  EerResult r;
  std::int64_t best_gap = std::numeric_limits<std::int64_t>::max();
  for (const auto& p : c.points) {
    const std::int64_t gap = std::abs(detail::scaled_gap(c, p));
    if (gap <= best_gap) {
      best_gap = gap;
      r.threshold = p.threshold;
    }
  }
  for (std::size_t k = 0; k < c.points.size(); ++k) {
    const auto& p = c.points[k];
    const std::int64_t d = detail::scaled_gap(c, p);
    if (d == 0) {
      r.eer = p.fpr;
      return r;
    }
    if (d > 0) {
      if (k == 0) {
        r.eer = (p.fpr + p.fnr) / 2.0;
        return r;
      }
      const auto& q = c.points[k - 1];
      const double dq = static_cast<double>(detail::scaled_gap(c, q));
      const double t = -dq / (static_cast<double>(d) - dq);
      const double fpr = q.fpr + t * (p.fpr - q.fpr);
      const double fnr = q.fnr + t * (p.fnr - q.fnr);
      r.eer = (fpr + fnr) / 2.0;
      return r;
    }
  }
  const auto& last = c.points.back();
  r.eer = (last.fpr + last.fnr) / 2.0;
  return r;
}

/// Trapezoidal area under TPR(FPR). With the full threshold sweep this equals
/// P(genuine > impostor) + P(tie) / 2.
inline double auc(const RocCurve& c) {
  if (c.points.empty()) throw Error("empty ROC curve");
  double twice_area = 0.0;  // in units of genuine*impostor
  std::int64_t prev_imp = 0, prev_gen = 0;
  for (const auto& p : c.points) {
    twice_area += static_cast<double>(p.accepted_impostor - prev_imp) *
                  static_cast<double>(p.accepted_genuine + prev_gen);
    prev_imp = p.accepted_impostor;
    prev_gen = p.accepted_genuine;
  }
  return twice_area / (2.0 * static_cast<double>(c.genuine) * static_cast<double>(c.impostor));
}

struct BinaryCounts {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

  double accuracy() const {
    const auto total = tp + fp + tn + fn;
    return total == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total);
  }
  double f1() const {
    const auto denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
};

}  // namespace kwsv::eval
