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

// Brute-force metric references: O(n^2) sweeps with no sorting tricks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <vector>

namespace oracle {

struct Rates {
  double fpr, fnr;
};

inline Rates rates_at(const std::vector<double>& g, const std::vector<double>& im, double t) {
  double fa = 0, fr = 0;
  for (double s : im) fa += s > t ? 1 : 0;
  for (double s : g) fr += s > t ? 0 : 1;
  return {fa / double(im.size()), fr / double(g.size())};
}

// Pairwise AUC: P(g > i) + P(g == i) / 2.
inline double pairwise_auc(const std::vector<double>& g, const std::vector<double>& im) {
  double wins = 0;
  for (double a : g)
    for (double b : im) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  return wins / (double(g.size()) * double(im.size()));
}

struct Eer {
  double eer, tau;
};

// Sweep thresholds high to low; tau* minimizes |FPR - FNR| (lower tau on
// ties); the rate is read at the first sign change of FPR - FNR.
inline Eer sweep_eer(const std::vector<double>& g, const std::vector<double>& im) {
  std::set<double, std::greater<>> ts(g.begin(), g.end());
  ts.insert(im.begin(), im.end());
  std::vector<double> th(ts.begin(), ts.end());
  th.push_back(-std::numeric_limits<double>::infinity());
  Eer out{0, 0};
  double best = std::numeric_limits<double>::infinity();
  for (double t : th) {
    const auto r = rates_at(g, im, t);
    const double gap = std::abs(r.fpr - r.fnr);
    if (gap <= best + 1e-12) {
      best = std::min(best, gap);
      out.tau = t;
    }
  }
  Rates prev{0, 0};
  for (std::size_t k = 0; k < th.size(); ++k) {
    const auto r = rates_at(g, im, th[k]);
    const double d = r.fpr - r.fnr;
    if (std::abs(d) < 1e-12) {
      out.eer = r.fpr;
      return out;
    }
    if (d > 0) {
      if (k == 0) {
        out.eer = (r.fpr + r.fnr) / 2;
        return out;
      }
      const double dp = prev.fpr - prev.fnr;
      const double a = -dp / (d - dp);
      out.eer = ((prev.fpr + a * (r.fpr - prev.fpr)) + (prev.fnr + a * (r.fnr - prev.fnr))) / 2;
      return out;
    }
    prev = r;
  }
  return out;
}

// Random fixture; quantized scores so ties actually happen.
inline void random_fixture(std::mt19937_64& rng, std::vector<double>& g, std::vector<double>& im) {
  std::uniform_int_distribution<int> size(1, 30), level(0, 40);
  std::uniform_real_distribution<double> shift(-0.3, 0.3);
  const bool quantize = rng() % 2;
  const double delta = shift(rng);
  std::normal_distribution<double> n;
  g.assign(static_cast<std::size_t>(size(rng)), 0.0);
  im.assign(static_cast<std::size_t>(size(rng)), 0.0);
  for (auto& s : g) s = quantize ? level(rng) / 40.0 + delta : n(rng) * 0.2 + 0.5 + delta;
  for (auto& s : im) s = quantize ? level(rng) / 40.0 : n(rng) * 0.2 + 0.5;
}

}  // namespace oracle
