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

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "kwsv/mfcc.hpp"
#include "kwsv/stream_buffer.hpp"
#include "kwsv/wav.hpp"

namespace {

using kwsv::StreamConfig;

// Enumerates frame start offsets that still leave a whole frame in the window.
std::size_t enumerate_frames(std::size_t window, std::size_t frame, std::size_t stride) {
  std::size_t n = 0;
  for (std::size_t start = 0; start + frame <= window; start += stride) ++n;
  return n;
}

std::vector<std::int16_t> sine(std::size_t n, double hz, double amplitude, int rate = 16000) {
  std::vector<std::int16_t> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = static_cast<std::int16_t>(std::lround(amplitude * 32767.0 *
                                                 std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate)));
  return v;
}

std::vector<std::int16_t> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(-12000, 12000);
  std::vector<std::int16_t> v(n);
  for (auto& s : v) s = static_cast<std::int16_t>(d(rng));
  return v;
}

TEST(StreamConfig, ReferenceValues) {
  const auto c = StreamConfig::from_seconds(16000, 1.0, 0.25, 0.03, 0.02, 40);
  EXPECT_EQ(c, StreamConfig::reference());
  EXPECT_EQ(c.window_samples, 16000u);
  EXPECT_EQ(c.hop_samples, 4000u);
  EXPECT_EQ(c.frame_samples, 480u);
  EXPECT_EQ(c.stride_samples, 320u);
}

TEST(StreamConfig, RejectsInvalid) {
  EXPECT_THROW(StreamConfig::from_seconds(16000, 1.0, 0.25, 1.5, 0.02, 40), kwsv::ConfigError);
  EXPECT_THROW(StreamConfig::from_seconds(16000, 1.0, 0.25, 0.03, 0.04, 40), kwsv::ConfigError);
  EXPECT_THROW(StreamConfig::from_seconds(16000, 1.0, 1.25, 0.03, 0.02, 40), kwsv::ConfigError);
  EXPECT_THROW(StreamConfig::from_seconds(16000, 1.0, 0.25, 0.03001, 0.02, 40), kwsv::ConfigError);
  EXPECT_THROW(StreamConfig::from_seconds(0, 1.0, 0.25, 0.03, 0.02, 40), kwsv::ConfigError);
}

TEST(FrameCount, Examples) {
  EXPECT_EQ(kwsv::frame_count(16000, 480, 320), 49u);
  EXPECT_EQ(kwsv::frame_count(16000, 16000, 320), 1u);
  EXPECT_EQ(kwsv::frame_count(16000, 16000, 7), 1u);
  EXPECT_EQ(kwsv::frame_count(16000, 400, 160), 98u);
  EXPECT_EQ(enumerate_frames(16000, 400, 160), 98u);
  EXPECT_THROW(kwsv::frame_count(16000, 16001, 160), kwsv::ConfigError);
}

TEST(FrameCount, MatchesEnumeration) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const std::size_t w = std::uniform_int_distribution<std::size_t>(1, 5000)(rng);
    const std::size_t f = std::uniform_int_distribution<std::size_t>(1, w)(rng);
    const std::size_t s = std::uniform_int_distribution<std::size_t>(1, f)(rng);
    ASSERT_EQ(kwsv::frame_count(w, f, s), enumerate_frames(w, f, s)) << w << " " << f << " " << s;
  }
}

TEST(StreamBuffer, OneWindowFromFullSecond) {
  kwsv::StreamBuffer buf(StreamConfig::reference());
  const auto samples = noise(16000, 1);
  const auto windows = buf.push_samples(samples);
  ASSERT_EQ(windows.size(), 1u);
  EXPECT_EQ(windows[0].start_time, 0.0);
  EXPECT_EQ(windows[0].samples, samples);
}

TEST(StreamBuffer, EmptyPush) {
  kwsv::StreamBuffer buf(StreamConfig::reference());
  EXPECT_TRUE(buf.push_samples({}).empty());
}

TEST(StreamBuffer, HopSchedule) {
  kwsv::StreamBuffer buf(StreamConfig::reference());
  const auto samples = noise(24000, 2);
  const auto windows = buf.push_samples(samples);
  ASSERT_EQ(windows.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(windows[k].start_time, 0.25 * static_cast<double>(k));
    EXPECT_EQ(windows[k].start_sample, 4000 * k);
    const std::vector<std::int16_t> expect(samples.begin() + static_cast<long>(4000 * k),
                                           samples.begin() + static_cast<long>(4000 * k + 16000));
    EXPECT_EQ(windows[k].samples, expect);
  }
}

TEST(StreamBuffer, ChunkingDoesNotMatter) {
  const auto samples = noise(45000, 3);
  kwsv::StreamBuffer whole(StreamConfig::reference()), pieces(StreamConfig::reference());
  const auto expect = whole.push_samples(samples);
  std::vector<kwsv::AudioWindow> got;
  std::mt19937_64 rng(4);
  std::size_t pos = 0;
  while (pos < samples.size()) {
    const std::size_t len = std::min<std::size_t>(std::uniform_int_distribution<std::size_t>(0, 7000)(rng),
                                                  samples.size() - pos);
    auto w = pieces.push_samples(std::span(samples).subspan(pos, len));
    got.insert(got.end(), w.begin(), w.end());
    pos += len;
  }
  ASSERT_EQ(got.size(), expect.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].samples, expect[i].samples);
    EXPECT_EQ(got[i].start_time, expect[i].start_time);
    if (i > 0) {
      EXPECT_DOUBLE_EQ(got[i].start_time - got[i - 1].start_time, 0.25);
    }
  }
}

TEST(StreamBuffer, OverrunReportsDroppedSamples) {
  kwsv::StreamBuffer buf(StreamConfig::reference(), 20000);
  const std::vector<std::int16_t> big(20001, 1);
  try {
    buf.push_samples(big);
    FAIL() << "expected overrun";
  } catch (const kwsv::OverrunError& e) {
    EXPECT_EQ(e.dropped(), 20001u);
  }
  EXPECT_EQ(buf.samples_received(), 0u);
  EXPECT_THROW(kwsv::StreamBuffer(StreamConfig::reference(), 100), kwsv::ConfigError);
}

TEST(Mfcc, ReferenceShape) {
  const kwsv::MfccExtractor mfcc(StreamConfig::reference());
  const auto s = mfcc.extract(noise(16000, 5));
  EXPECT_EQ(s.bins, 40u);
  EXPECT_EQ(s.frames, 49u);
  EXPECT_EQ(s.size(), 1960u);
  EXPECT_EQ(mfcc.fft_size(), 512u);
  for (float v : s.coefficients) EXPECT_TRUE(std::isfinite(v));
}

TEST(Mfcc, SilenceColumnsIdentical) {
  kwsv::AudioWindow w;
  w.samples.assign(16000, 0);
  const auto s = kwsv::extract_mfcc(w, StreamConfig::reference());
  ASSERT_EQ(s.size(), 1960u);
  for (std::size_t t = 1; t < s.frames; ++t)
    for (std::size_t b = 0; b < s.bins; ++b) ASSERT_EQ(s.at(b, t), s.at(b, 0));
  // Every filter sits at the log floor, so only the DC cepstral term is non-zero.
  EXPECT_NEAR(s.at(0, 0), std::log(1e-6) * std::sqrt(40.0), 1e-3);
}

TEST(Mfcc, SinePeaksInFilterCoveringOneKilohertz) {
  // Independent filterbank geometry: 42 points equally spaced on the mel scale
  // between 20 Hz and 8 kHz; filter m rises from point m to m+1, falls to m+2.
  const auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  const auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  std::vector<double> pts(42);
  for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = hz(mel(20.0) + (mel(8000.0) - mel(20.0)) * k / 41.0);
  std::size_t expected = 0;
  double best = -1.0;
  for (std::size_t m = 0; m < 40; ++m) {
    const double f = 1000.0;
    double w = 0.0;
    if (f > pts[m] && f <= pts[m + 1]) w = (f - pts[m]) / (pts[m + 1] - pts[m]);
    else if (f > pts[m + 1] && f < pts[m + 2]) w = (pts[m + 2] - f) / (pts[m + 2] - pts[m + 1]);
    if (w > best) best = w, expected = m;
  }

  const kwsv::MfccExtractor mfcc(StreamConfig::reference());
  for (std::size_t m = 0; m < 40; ++m) EXPECT_NEAR(mfcc.filterbank().center_hz(m), pts[m + 1], 1e-6);

  const auto x = sine(16000, 1000.0, 0.5);
  for (std::size_t t = 0; t < 49; ++t) {
    const auto e = mfcc.mel_energies(std::span(x).subspan(t * 320, 480));
    const auto peak = static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
    ASSERT_EQ(peak, expected) << "frame " << t;
  }
}

TEST(Mfcc, Deterministic) {
  const kwsv::MfccExtractor mfcc(StreamConfig::reference());
  const auto x = noise(16000, 6);
  EXPECT_EQ(mfcc.extract(x).coefficients, mfcc.extract(x).coefficients);
}

TEST(Mfcc, TimeShiftMovesColumns) {
  const kwsv::MfccExtractor mfcc(StreamConfig::reference());
  const auto long_signal = noise(16000 + 5 * 320, 7);
  for (std::size_t m : {1u, 3u, 5u}) {
    const auto a = mfcc.extract(std::span(long_signal).subspan(0, 16000));
    const auto b = mfcc.extract(std::span(long_signal).subspan(m * 320, 16000));
    for (std::size_t t = 0; t + m < 49; ++t)
      for (std::size_t k = 0; k < 40; ++k) ASSERT_EQ(b.at(k, t), a.at(k, t + m));
  }
}

TEST(Mfcc, FrameIndependence) {
  const kwsv::MfccExtractor mfcc(StreamConfig::reference());
  const auto x = noise(16000, 8);
  const auto full = mfcc.extract(x);
  for (std::size_t t : {0u, 17u, 48u}) {
    std::vector<std::int16_t> masked(16000, 0);
    std::copy_n(x.begin() + static_cast<long>(t * 320), 480, masked.begin() + static_cast<long>(t * 320));
    const auto m = mfcc.extract(masked);
    for (std::size_t k = 0; k < 40; ++k) ASSERT_EQ(m.at(k, t), full.at(k, t));
  }
}

TEST(Mfcc, RejectsWrongLength) {
  const kwsv::MfccExtractor mfcc(StreamConfig::reference());
  EXPECT_THROW(mfcc.extract(std::vector<std::int16_t>(15999)), kwsv::ShapeError);
}

TEST(Wav, RoundTripAndRateCheck) {
  const auto x = noise(1234, 9);
  const auto bytes = kwsv::encode_wav(x, 16000);
  const auto wav = kwsv::parse_wav(std::span(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()));
  EXPECT_EQ(wav.sample_rate_hz, 16000);
  EXPECT_EQ(wav.samples, x);

  const auto path = testing::TempDir() + "/r8k.wav";
  kwsv::write_wav(path, x, 8000);
  EXPECT_THROW(kwsv::read_wav_at_rate(path, 16000), kwsv::FormatError);
  EXPECT_EQ(kwsv::read_wav_at_rate(path, 8000), x);
}

TEST(Wav, RejectsGarbage) {
  const std::vector<unsigned char> junk = {'R', 'I', 'F', 'F', 0, 0, 0, 0, 'J', 'U', 'N', 'K'};
  EXPECT_THROW(kwsv::parse_wav(junk), kwsv::FormatError);
}

TEST(Spectrogram, CsvLayout) {
  const kwsv::MfccExtractor mfcc(StreamConfig::reference());
  std::ostringstream o;
  kwsv::write_spectrogram_csv(o, mfcc.extract(noise(16000, 10)));
  std::istringstream in(o.str());
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 48);
  }
  EXPECT_EQ(rows, 40u);
}

}  // namespace
