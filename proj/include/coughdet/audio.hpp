/*
 * Copyright 2026 The coughdet Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the License); you may
 * not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an AS IS BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * Description: RIFF/WAVE PCM16 ingestion and 1-second segmentation.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <streambuf>
#include <string>
#include <vector>

#include "coughdet/error.hpp"

namespace coughdet {

inline constexpr int kSampleRateHz = 16000;
inline constexpr std::size_t kSegmentSamples = 16000;

struct AudioStream {
  std::vector<float> samples;  // normalized to [-1, 1)
  int sample_rate_hz = kSampleRateHz;
  int channel_count = 1;
};

/// One second of audio, the unit of inference. The last `padded_sample_count`
/// samples are zero fill appended past the end of the source stream.
struct AudioSegment {
  std::vector<float> samples = std::vector<float>(kSegmentSamples, 0.0f);
  double start_time_s = 0.0;
  std::size_t padded_sample_count = 0;
  std::size_t index = 0;

  std::size_t real_sample_count() const { return samples.size() - padded_sample_count; }
  std::span<const float> real_samples() const {
    return std::span<const float>(samples).first(real_sample_count());
  }
};

namespace detail {

inline std::uint16_t read_u16le(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t read_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

// Read-only streambuf over caller-owned bytes.
class SpanBuf : public std::streambuf {
 public:
  explicit SpanBuf(std::span<const std::uint8_t> bytes) {
    auto* p = const_cast<char*>(reinterpret_cast<const char*>(bytes.data()));
    setg(p, p, p + bytes.size());
  }
};

inline bool read_exact(std::istream& in, std::uint8_t* dst, std::size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount()) == n;
}

}  // namespace detail

/// Incremental PCM16 reader. Parses the RIFF header eagerly, then hands out
/// samples in caller-sized blocks so a stream never has to be resident.
class WavReader {
 public:
  // Streaming writers (e.g. `sox ... -` to a pipe) emit this as the data size.
  static constexpr std::uint32_t kUnboundedData = 0xFFFFFFFFu;

  explicit WavReader(std::istream& in) : in_(in) { read_header(); }

  /// Reads up to `max_samples` normalized samples; returns fewer only at the
  /// end of the data chunk.
  std::vector<float> read(std::size_t max_samples) {
    std::vector<float> out;
    out.reserve(max_samples);
    std::array<std::uint8_t, 2> buf{};
    while (out.size() < max_samples && !exhausted()) {
      if (!detail::read_exact(in_, buf.data(), 2)) {
        if (data_bytes_ == kUnboundedData && in_.gcount() == 0) {
          done_ = true;
          break;
        }
        throw Error(ErrorKind::MalformedWav,
                    "data chunk truncated at byte offset " + std::to_string(offset()));
      }
      consumed_ += 2;
      auto raw = static_cast<std::int16_t>(detail::read_u16le(buf.data()));
      out.push_back(static_cast<float>(raw) / 32768.0f);
    }
    return out;
  }

  bool exhausted() const {
    return done_ || (data_bytes_ != kUnboundedData && consumed_ >= data_bytes_);
  }

  /// Byte offset of the next unread sample within the file.
  std::uint64_t offset() const { return data_offset_ + consumed_; }

 private:
  void read_header() {
    std::array<std::uint8_t, 12> riff{};
    if (!detail::read_exact(in_, riff.data(), riff.size()) ||
        std::memcmp(riff.data(), "RIFF", 4) != 0 || std::memcmp(riff.data() + 8, "WAVE", 4) != 0) {
      throw Error(ErrorKind::MalformedWav, "missing RIFF/WAVE header");
    }
    std::uint64_t pos = 12;
    bool have_fmt = false;
    for (;;) {
      std::array<std::uint8_t, 8> chunk{};
      if (!detail::read_exact(in_, chunk.data(), chunk.size())) {
        throw Error(ErrorKind::MalformedWav,
                    have_fmt ? "no data chunk" : "no fmt chunk before end of file");
      }
      pos += 8;
      const std::uint32_t size = detail::read_u32le(chunk.data() + 4);
      if (std::memcmp(chunk.data(), "fmt ", 4) == 0) {
        if (size < 16) throw Error(ErrorKind::MalformedWav, "fmt chunk shorter than 16 bytes");
        std::vector<std::uint8_t> fmt(size + (size & 1u));
        if (!detail::read_exact(in_, fmt.data(), fmt.size())) {
          throw Error(ErrorKind::MalformedWav, "fmt chunk truncated");
        }
        pos += fmt.size();
        check_format(detail::read_u16le(fmt.data()), detail::read_u16le(fmt.data() + 2),
                     detail::read_u32le(fmt.data() + 4), detail::read_u16le(fmt.data() + 14));
        have_fmt = true;
      } else if (std::memcmp(chunk.data(), "data", 4) == 0) {
        if (!have_fmt) throw Error(ErrorKind::MalformedWav, "data chunk precedes fmt chunk");
        if (size != kUnboundedData && (size & 1u)) {
          throw Error(ErrorKind::MalformedWav, "odd data chunk size for 16-bit samples");
        }
        data_bytes_ = size;
        data_offset_ = pos;
        return;
      } else {
        // Unknown chunk (LIST, fact, ...): skip including the pad byte.
        const std::uint64_t skip = static_cast<std::uint64_t>(size) + (size & 1u);
        in_.ignore(static_cast<std::streamsize>(skip));
        if (static_cast<std::uint64_t>(in_.gcount()) != skip) {
          throw Error(ErrorKind::MalformedWav, "chunk overruns end of file");
        }
        pos += skip;
      }
    }
  }

  static void check_format(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                           std::uint16_t bits) {
    if (format == 1 && channels == 1 && rate == static_cast<std::uint32_t>(kSampleRateHz) &&
        bits == 16) {
      return;
    }
    throw Error(ErrorKind::UnsupportedFormat,
                "expected PCM(1) 16-bit mono 16000 Hz, found format " + std::to_string(format) +
                    ", " + std::to_string(bits) + "-bit, " + std::to_string(channels) +
                    " channel(s), " + std::to_string(rate) + " Hz");
  }

  std::istream& in_;
  std::uint32_t data_bytes_ = 0;
  std::uint64_t data_offset_ = 0;
  std::uint64_t consumed_ = 0;
  bool done_ = false;
};

inline AudioStream parse_wav(std::span<const std::uint8_t> bytes) {
  detail::SpanBuf buf(bytes);
  std::istream in(&buf);
  WavReader reader(in);
  AudioStream stream;
  while (!reader.exhausted()) {
    auto block = reader.read(1 << 16);
    if (block.empty()) break;
    stream.samples.insert(stream.samples.end(), block.begin(), block.end());
  }
  return stream;
}

/// Minimal canonical 44-byte-header writer. Samples are scaled by 32768 and
/// saturated, so any stream produced by parse_wav serializes bit-exactly.
inline std::vector<std::uint8_t> serialize_wav(const AudioStream& stream) {
  const auto data_bytes = static_cast<std::uint32_t>(stream.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  tag("RIFF");
  detail::put_u32le(out, 36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  detail::put_u32le(out, 16);
  detail::put_u16le(out, 1);
  detail::put_u16le(out, 1);
  detail::put_u32le(out, kSampleRateHz);
  detail::put_u32le(out, kSampleRateHz * 2);
  detail::put_u16le(out, 2);
  detail::put_u16le(out, 16);
  tag("data");
  detail::put_u32le(out, data_bytes);
  for (float s : stream.samples) {
    const float scaled = std::nearbyint(s * 32768.0f);
    const auto clamped = static_cast<std::int16_t>(std::clamp(scaled, -32768.0f, 32767.0f));
    detail::put_u16le(out, static_cast<std::uint16_t>(clamped));
  }
  return out;
}

/// Builds segment `index` from up to 16000 real samples, zero-filling the rest.
inline AudioSegment make_segment(std::span<const float> real, std::size_t index) {
  AudioSegment seg;
  const std::size_t n = std::min(real.size(), kSegmentSamples);
  std::copy_n(real.begin(), n, seg.samples.begin());
  seg.padded_sample_count = kSegmentSamples - n;
  seg.index = index;
  seg.start_time_s = static_cast<double>(index * kSegmentSamples) / kSampleRateHz;
  return seg;
}

/// Back-to-back, non-overlapping 1 s tiling; the final segment is zero-padded.
inline std::vector<AudioSegment> segment(const AudioStream& stream) {
  if (stream.samples.empty()) throw Error(ErrorKind::EmptyStream, "stream has no samples");
  std::vector<AudioSegment> out;
  const std::span<const float> all(stream.samples);
  for (std::size_t start = 0, k = 0; start < all.size(); start += kSegmentSamples, ++k) {
    out.push_back(make_segment(all.subspan(start, std::min(kSegmentSamples, all.size() - start)), k));
  }
  return out;
}

}  // namespace coughdet
