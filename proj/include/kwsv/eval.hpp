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
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "kwsv/asv.hpp"
#include "kwsv/metrics.hpp"
#include "kwsv/mfcc.hpp"
#include "kwsv/wav.hpp"

namespace kwsv::eval {

enum class Split { Train, Val, Test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

inline Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val" || s == "validation") return Split::Val;
  if (s == "test") return Split::Test;
  throw FormatError("unknown split '" + s + "'");
}

struct LabeledUtterance {
  std::string path;
  std::string speaker;
  bool keyword = true;
  Split split = Split::Train;
  std::vector<std::int16_t> samples;
};

struct ManifestEntry {
  std::string path;
  std::string speaker;
  bool keyword = true;
  Split split = Split::Train;
};

/// Parses `path,speaker,keyword,split` lines. A first line starting with
/// "path," is taken as a header. Blank lines and '#' comments are skipped.
inline std::vector<ManifestEntry> parse_manifest(std::istream& in) {
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("path,", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 4)
      throw FormatError("manifest line " + std::to_string(lineno) + ": expected 4 fields");
    ManifestEntry e;
    e.path = f[0];
    e.speaker = f[1];
    if (f[2] == "1" || f[2] == "true" || f[2] == "yes") e.keyword = true;
    else if (f[2] == "0" || f[2] == "false" || f[2] == "no") e.keyword = false;
    else throw FormatError("manifest line " + std::to_string(lineno) + ": bad keyword flag");
    e.split = split_from_string(f[3]);
    out.push_back(std::move(e));
  }
  return out;
}

struct SplitCounts {
  std::size_t train = 0, val = 0, test = 0;
  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

/// Per-speaker 68/16/16 partition of n utterances (test takes the remainder).
inline SplitCounts expected_split_counts(std::size_t n) {
  SplitCounts c;
  c.train = static_cast<std::size_t>(std::llround(0.68 * static_cast<double>(n)));
  c.val = static_cast<std::size_t>(std::llround(0.16 * static_cast<double>(n)));
  c.test = n - c.train - c.val;
  return c;
}

struct Rejection {
  std::string path;
  std::string reason;
};

struct Dataset {
  std::vector<LabeledUtterance> utterances;  // sorted by (speaker, split, path)
  std::vector<Rejection> rejected;
  std::vector<std::string> warnings;  // split-proportion deviations
};

/// Loads every manifest entry whose audio is exactly one window at the
/// configured rate; other files are reported, not loaded.
inline Dataset load_dataset(const std::filesystem::path& root, const std::vector<ManifestEntry>& manifest,
                            const StreamConfig& cfg) {
  Dataset ds;
  for (const auto& e : manifest) {
    const auto full = std::filesystem::path(e.path).is_absolute() ? std::filesystem::path(e.path) : root / e.path;
    try {
      WavData wav = read_wav(full.string());
      if (wav.sample_rate_hz != cfg.sample_rate_hz) {
        ds.rejected.push_back({e.path, "sample rate " + std::to_string(wav.sample_rate_hz) + " Hz, expected " +
                                           std::to_string(cfg.sample_rate_hz) + " Hz"});
        continue;
      }
      if (wav.samples.size() != cfg.window_samples) {
        ds.rejected.push_back({e.path, "duration " + std::to_string(wav.samples.size()) +
                                           " samples, expected " + std::to_string(cfg.window_samples)});
        continue;
      }
      ds.utterances.push_back({e.path, e.speaker, e.keyword, e.split, std::move(wav.samples)});
    } catch (const Error& err) {
      ds.rejected.push_back({e.path, err.what()});
    }
  }
  std::stable_sort(ds.utterances.begin(), ds.utterances.end(), [](const auto& a, const auto& b) {
    return std::tie(a.speaker, a.split, a.path) < std::tie(b.speaker, b.split, b.path);
  });
  std::map<std::string, SplitCounts> per;
  for (const auto& u : ds.utterances) {
    auto& c = per[u.speaker];
    (u.split == Split::Train ? c.train : u.split == Split::Val ? c.val : c.test)++;
  }
  for (const auto& [spk, c] : per) {
    const auto want = expected_split_counts(c.train + c.val + c.test);
    const auto off = [](std::size_t a, std::size_t b) { return (a > b ? a - b : b - a) > 1; };
    if (off(c.train, want.train) || off(c.val, want.val) || off(c.test, want.test))
      ds.warnings.push_back("speaker " + spk + ": split " + std::to_string(c.train) + "/" +
                            std::to_string(c.val) + "/" + std::to_string(c.test) + " deviates from " +
                            std::to_string(want.train) + "/" + std::to_string(want.val) + "/" +
                            std::to_string(want.test));
  }
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& root, const std::filesystem::path& manifest,
                            const StreamConfig& cfg) {
  std::ifstream in(manifest);
  if (!in) throw Error("cannot open manifest " + manifest.string());
  return load_dataset(root, parse_manifest(in), cfg);
}

/// An utterance reduced to its d-vector; the protocol works on these only.
struct EmbeddedUtterance {
  std::string speaker;
  Split split = Split::Train;
  DVector dv;
};

template <class Embedder>
std::vector<EmbeddedUtterance> embed_dataset(const Dataset& ds, const Embedder& embedder,
                                             const StreamConfig& cfg) {
  const MfccExtractor mfcc(cfg);
  std::vector<EmbeddedUtterance> out;
  for (const auto& u : ds.utterances)
    if (u.keyword) out.push_back({u.speaker, u.split, embedder.embed(mfcc.extract(u.samples))});
  return out;
}

enum class Method { Asv, Mcs };

inline const char* to_string(Method m) { return m == Method::Asv ? "ASV" : "MCS"; }

inline Method method_from_string(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "asv") return Method::Asv;
  if (s == "mcs") return Method::Mcs;
  throw ConfigError("unknown method '" + s + "'");
}

struct CellResult {
  std::string speaker;
  Method method = Method::Asv;
  std::size_t n = 0;
  bool skipped = false;
  std::string skip_reason;
  double accuracy = 0.0, f1 = 0.0, eer = 0.0, auc = 0.0;
  double threshold = 0.0;  // τ at the validation EER
};

struct Summary {
  Method method = Method::Asv;
  std::size_t n = 0;
  std::size_t speakers = 0;  // cells averaged
  double accuracy = 0.0, f1 = 0.0, eer = 0.0, auc = 0.0;
};

struct EvalReport {
  std::vector<CellResult> cells;      // ordered by (method, n, speaker)
  std::vector<Summary> summaries;     // ordered by (method, n)
  std::uint64_t seed = 0;

  const Summary& summary(Method m, std::size_t n) const {
    for (const auto& s : summaries)
      if (s.method == m && s.n == n) return s;
    throw Error("no summary for " + std::string(to_string(m)) + " n=" + std::to_string(n));
  }
};

inline double score(Method m, const DVector& probe, const EnrollmentSet& set) {
  return m == Method::Asv ? best_match_similarity(probe, set).sigma : mcs_similarity(probe, set);
}

/// Seeded permutation of a speaker's training utterances. Enrollment sets
/// for every n are prefixes of the same permutation, shared by all methods.
inline std::vector<std::size_t> enrollment_order(std::size_t count, std::uint64_t seed,
                                                 std::size_t speaker_index) {
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ull * (speaker_index + 1));
  for (std::size_t i = count; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(idx[i - 1], idx[pick(rng)]);
  }
  return idx;
}

/// Per-speaker, per-n, per-method evaluation.
///
/// For speaker S and size n: enroll n training vectors of S; score S's
/// validation vectors (genuine) against every other speaker's (impostor) to
/// get EER, AUC and τ at the EER; then classify every test vector with
/// score > τ and report accuracy and F1 with S as the positive class.
inline EvalReport run_protocol(const std::vector<EmbeddedUtterance>& data,
                               const std::vector<Method>& methods,
                               const std::vector<std::size_t>& n_values, std::uint64_t seed) {
  std::vector<std::string> speakers;
  for (const auto& u : data)
    if (std::find(speakers.begin(), speakers.end(), u.speaker) == speakers.end())
      speakers.push_back(u.speaker);
  std::sort(speakers.begin(), speakers.end());
  if (speakers.size() < 2) throw Error("evaluation needs at least two speakers");

  EvalReport rep;
  rep.seed = seed;
  for (Method m : methods) {
    for (std::size_t n : n_values) {
      Summary sum;
      sum.method = m;
      sum.n = n;
      for (std::size_t si = 0; si < speakers.size(); ++si) {
        const std::string& spk = speakers[si];
        CellResult cell;
        cell.speaker = spk;
        cell.method = m;
        cell.n = n;
        std::vector<const DVector*> train;
        for (const auto& u : data)
          if (u.speaker == spk && u.split == Split::Train) train.push_back(&u.dv);
        try {
          if (n == 0) throw Error("n must be positive");
          if (train.size() < n)
            throw Error("only " + std::to_string(train.size()) + " training utterances for n=" + std::to_string(n));
          const auto order = enrollment_order(train.size(), seed, si);
          EnrollmentSet set(n);
          for (std::size_t k = 0; k < n; ++k) set.enroll(*train[order[k]]);

          std::vector<double> genuine, impostor;
          for (const auto& u : data)
            if (u.split == Split::Val)
              (u.speaker == spk ? genuine : impostor).push_back(score(m, u.dv, set));
          if (genuine.empty() || impostor.empty()) throw Error("validation split lacks genuine or impostor data");
          const RocCurve roc = compute_roc(genuine, impostor);
          const EerResult e = eer_and_threshold(roc);
          cell.eer = e.eer;
          cell.auc = auc(roc);
          cell.threshold = e.threshold;

          BinaryCounts bc;
          bool any_test = false;
          for (const auto& u : data) {
            if (u.split != Split::Test) continue;
            any_test = true;
            const bool accept = score(m, u.dv, set) > cell.threshold;
            const bool positive = u.speaker == spk;
            if (positive) (accept ? bc.tp : bc.fn)++;
            else (accept ? bc.fp : bc.tn)++;
          }
          if (!any_test) throw Error("no test utterances");
          cell.accuracy = bc.accuracy();
          cell.f1 = bc.f1();
        } catch (const Error& err) {
          cell.skipped = true;
          cell.skip_reason = err.what();
        }
        if (!cell.skipped) {
          ++sum.speakers;
          sum.accuracy += cell.accuracy;
          sum.f1 += cell.f1;
          sum.eer += cell.eer;
          sum.auc += cell.auc;
        }
        rep.cells.push_back(std::move(cell));
      }
      if (sum.speakers > 0) {
        const double k = static_cast<double>(sum.speakers);
        sum.accuracy /= k;
        sum.f1 /= k;
        sum.eer /= k;
        sum.auc /= k;
      }
      rep.summaries.push_back(sum);
    }
  }
  return rep;
}

inline void write_report_csv(std::ostream& out, const EvalReport& r) {
  out << "# accuracy/F1 on the natural test-split genuine:impostor ratio; EER/AUC on validation; seed="
      << r.seed << '\n';
  out << "method,n,speaker,accuracy,f1,eer,auc,threshold,skipped\n";
  out << std::setprecision(10);
  for (const auto& c : r.cells) {
    out << to_string(c.method) << ',' << c.n << ',' << c.speaker << ',';
    if (c.skipped) out << ",,,,," << '"' << c.skip_reason << '"' << '\n';
    else out << c.accuracy << ',' << c.f1 << ',' << c.eer << ',' << c.auc << ',' << c.threshold << ",\n";
  }
  for (const auto& s : r.summaries)
    out << to_string(s.method) << ',' << s.n << ",average," << s.accuracy << ',' << s.f1 << ',' << s.eer
        << ',' << s.auc << ",,\n";
}

/// Averages laid out one row per (method, n).
inline std::string format_report_table(const EvalReport& r) {
  std::ostringstream o;
  o << "Method   n     Accuracy  F1        EER       AUC       speakers\n";
  o << "----------------------------------------------------------------\n";
  o << std::fixed << std::setprecision(3);
  for (const auto& s : r.summaries)
    o << std::left << std::setw(9) << to_string(s.method) << std::setw(6) << s.n << std::setw(10)
      << s.accuracy << std::setw(10) << s.f1 << std::setw(10) << s.eer << std::setw(10) << s.auc
      << s.speakers << '\n';
  return o.str();
}

/// Parameters of a synthetic speaker population.
///
/// Each speaker has a centre drawn from N(0, center_sigma^2 I). Around it sit
/// `modes` recording-condition modes at N(0, mode_sigma^2 I) offsets, and each
/// utterance is a mode plus N(0, noise_sigma^2 I) noise. Utterances are dealt
/// to modes round-robin before the split so every split sees every mode.
struct SyntheticSpec {
  std::size_t speakers = 4;
  std::size_t utterances_per_speaker = 94;
  std::size_t dimension = 256;
  std::size_t modes = 8;
  double center_sigma = 1.0;
  double mode_sigma = 3.0;
  double noise_sigma = 5.0;
};

inline std::vector<EmbeddedUtterance> synthetic_speakers(const SyntheticSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const auto draw = [&](const std::vector<double>& mean, double sigma) {
    std::vector<double> v(mean);
    for (double& x : v) x += sigma * unit(rng);
    return v;
  };
  const SplitCounts sc = expected_split_counts(spec.utterances_per_speaker);
  std::vector<EmbeddedUtterance> out;
  for (std::size_t s = 0; s < spec.speakers; ++s) {
    const std::string name = "spk" + std::to_string(s);
    const auto center = draw(std::vector<double>(spec.dimension, 0.0), spec.center_sigma);
    std::vector<std::vector<double>> modes;
    for (std::size_t k = 0; k < spec.modes; ++k) modes.push_back(draw(center, spec.mode_sigma));
    for (std::size_t u = 0; u < spec.utterances_per_speaker; ++u) {
      const auto v = draw(modes[u % modes.size()], spec.noise_sigma);
      EmbeddedUtterance e;
      e.speaker = name;
      e.split = u < sc.train ? Split::Train : u < sc.train + sc.val ? Split::Val : Split::Test;
      e.dv.values.assign(v.begin(), v.end());
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace kwsv::eval
