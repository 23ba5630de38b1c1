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

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kwsv/error.hpp"
#include "kwsv/mfcc.hpp"

namespace kwsv {

struct WavData {
  int sample_rate_hz = 0;
  std::vector<std::int16_t> samples;
};

namespace detail {

inline std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
inline std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}
inline void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

}  // namespace detail

/// Parses a RIFF/WAVE image holding 16-bit little-endian mono PCM.
inline WavData parse_wav(std::span<const unsigned char> bytes) {
  using detail::le16;
  using detail::le32;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("not a RIFF/WAVE file");
  WavData out;
  bool have_fmt = false, have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* h = bytes.data() + pos;
    const std::uint32_t size = le32(h + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw FormatError("truncated WAV chunk");
    if (std::memcmp(h, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("short fmt chunk");
      const unsigned char* f = bytes.data() + body;
      const std::uint16_t format = le16(f), channels = le16(f + 2), bits = le16(f + 14);
      if (format != 1) throw FormatError("WAV is not integer PCM");
      if (channels != 1) throw FormatError("WAV must be mono");
      if (bits != 16) throw FormatError("WAV must be 16-bit");
      out.sample_rate_hz = static_cast<int>(le32(f + 4));
      have_fmt = true;
    } else if (std::memcmp(h, "data", 4) == 0) {
      out.samples.resize(size / 2);
      for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = static_cast<std::int16_t>(le16(bytes.data() + body + 2 * i));
      have_data = true;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || !have_data) throw FormatError("WAV missing fmt or data chunk");
  return out;
}

inline WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return parse_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

/// Reads a WAV and insists on the pipeline's sample rate; there is no resampler.
inline std::vector<std::int16_t> read_wav_at_rate(const std::string& path, int sample_rate_hz) {
  auto wav = read_wav(path);
  if (wav.sample_rate_hz != sample_rate_hz)
    throw FormatError(path + ": sample rate " + std::to_string(wav.sample_rate_hz) +
                      " Hz, expected " + std::to_string(sample_rate_hz) + " Hz");
  return std::move(wav.samples);
}

inline std::string encode_wav(std::span<const std::int16_t> samples, int sample_rate_hz) {
  using detail::put16;
  using detail::put32;
  std::string s;
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  s += "RIFF";
  put32(s, 36 + data_bytes);
  s += "WAVEfmt ";
  put32(s, 16);
  put16(s, 1);
  put16(s, 1);
  put32(s, static_cast<std::uint32_t>(sample_rate_hz));
  put32(s, static_cast<std::uint32_t>(sample_rate_hz) * 2);
  put16(s, 2);
  put16(s, 16);
  s += "data";
  put32(s, data_bytes);
  for (std::int16_t v : samples) put16(s, static_cast<std::uint16_t>(v));
  return s;
}

inline void write_wav(const std::string& path, std::span<const std::int16_t> samples,
                      int sample_rate_hz) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const auto bytes = encode_wav(samples, sample_rate_hz);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

/// Debug dump: one row per mel bin, one column per frame.
inline void write_spectrogram_csv(std::ostream& out, const Spectrogram& s) {
  out.precision(9);
  for (std::size_t b = 0; b < s.bins; ++b) {
    for (std::size_t t = 0; t < s.frames; ++t) {
      if (t) out << ',';
      out << s.at(b, t);
    }
    out << '\n';
  }
}

}  // namespace kwsv
