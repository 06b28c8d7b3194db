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
 * Description: Weights of the three-conv cough classifier and the "CGHW"
 * binary container they travel in.
 *
 * File layout (little-endian):
 *   "CGHW" | version u32 | tensor count u32
 *   per tensor: name length u8 | name (UTF-8) | dtype u8 (0 f32, 1 i8) |
 *               rank u8 | dims u32 x rank | data
 *               [i8 only: scale f32 | zero point i32]
 *   CRC-32 of every preceding byte, u32
 */

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "coughdet/crc32.hpp"
#include "coughdet/error.hpp"

namespace coughdet {

enum class DType : std::uint8_t { F32 = 0, I8 = 1 };

struct Tensor {
  std::string name;
  DType dtype = DType::F32;
  std::vector<std::uint32_t> dims;
  std::vector<float> f32;        // populated when dtype == F32
  std::vector<std::int8_t> i8;   // populated when dtype == I8
  float scale = 1.0f;
  std::int32_t zero_point = 0;

  static Tensor zeros(std::string name, std::vector<std::uint32_t> dims) {
    Tensor t;
    t.name = std::move(name);
    t.dims = std::move(dims);
    t.f32.assign(t.element_count(), 0.0f);
    return t;
  }

  std::size_t element_count() const {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           [](std::size_t a, std::uint32_t b) { return a * b; });
  }

  /// Float view of the values; int8 tensors are dequantized.
  std::vector<float> to_float() const {
    if (dtype == DType::F32) return f32;
    std::vector<float> out(i8.size());
    for (std::size_t i = 0; i < i8.size(); ++i) {
      out[i] = scale * static_cast<float>(static_cast<std::int32_t>(i8[i]) - zero_point);
    }
    return out;
  }

  /// Stored bytes of the values plus quantization parameters.
  std::size_t payload_bytes() const {
    return dtype == DType::F32 ? f32.size() * 4 : i8.size() + 8;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

inline std::string shape_string(std::span<const std::uint32_t> dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(dims[i]);
  }
  return s.empty() ? "scalar" : s;
}

inline constexpr std::uint32_t kInputMfcc = 40;
inline constexpr std::uint32_t kConv1Filters = 16;
inline constexpr std::uint32_t kConv2Filters = 32;
inline constexpr std::uint32_t kConv3Filters = 40;
inline constexpr std::uint32_t kKernelSize = 3;
inline constexpr std::uint32_t kDefaultInputFrames = 267;

/// Parameters of conv(16) -> conv(32) -> conv(40) -> global max pool ->
/// batch norm -> dense(1). Kernels are stored 3x3xCinxCout.
struct ModelWeights {
  Tensor conv1_kernel, conv1_bias;
  Tensor conv2_kernel, conv2_bias;
  Tensor conv3_kernel, conv3_bias;
  Tensor bn_gamma, bn_beta, bn_moving_mean, bn_moving_var;
  float bn_epsilon = 1e-3f;
  Tensor dense_kernel, dense_bias;
  std::array<std::uint32_t, 3> input_shape{kInputMfcc, kDefaultInputFrames, 1};

  /// Architecture-shaped all-zero float weights with unit BN variance.
  static ModelWeights zeros(std::uint32_t n_frames = kDefaultInputFrames) {
    ModelWeights w;
    w.conv1_kernel = Tensor::zeros("conv1.kernel", {kKernelSize, kKernelSize, 1, kConv1Filters});
    w.conv1_bias = Tensor::zeros("conv1.bias", {kConv1Filters});
    w.conv2_kernel = Tensor::zeros("conv2.kernel", {kKernelSize, kKernelSize, kConv1Filters, kConv2Filters});
    w.conv2_bias = Tensor::zeros("conv2.bias", {kConv2Filters});
    w.conv3_kernel = Tensor::zeros("conv3.kernel", {kKernelSize, kKernelSize, kConv2Filters, kConv3Filters});
    w.conv3_bias = Tensor::zeros("conv3.bias", {kConv3Filters});
    w.bn_gamma = Tensor::zeros("bn.gamma", {kConv3Filters});
    w.bn_gamma.f32.assign(kConv3Filters, 1.0f);
    w.bn_beta = Tensor::zeros("bn.beta", {kConv3Filters});
    w.bn_moving_mean = Tensor::zeros("bn.moving_mean", {kConv3Filters});
    w.bn_moving_var = Tensor::zeros("bn.moving_var", {kConv3Filters});
    w.bn_moving_var.f32.assign(kConv3Filters, 1.0f);
    w.dense_kernel = Tensor::zeros("dense.kernel", {kConv3Filters, 1});
    w.dense_bias = Tensor::zeros("dense.bias", {1});
    w.input_shape = {kInputMfcc, n_frames, 1};
    return w;
  }

  std::vector<const Tensor*> parameters() const {
    return {&conv1_kernel, &conv1_bias, &conv2_kernel, &conv2_bias, &conv3_kernel, &conv3_bias,
            &bn_gamma,     &bn_beta,    &bn_moving_mean, &bn_moving_var, &dense_kernel, &dense_bias};
  }

  std::vector<Tensor*> parameters() {
    return {&conv1_kernel, &conv1_bias, &conv2_kernel, &conv2_bias, &conv3_kernel, &conv3_bias,
            &bn_gamma,     &bn_beta,    &bn_moving_mean, &bn_moving_var, &dense_kernel, &dense_bias};
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto* t : parameters()) n += t->element_count();
    return n;
  }

  /// BN moving statistics are the only non-trainable parameters.
  std::size_t non_trainable_count() const {
    return bn_moving_mean.element_count() + bn_moving_var.element_count();
  }

  std::size_t trainable_count() const { return parameter_count() - non_trainable_count(); }

  std::size_t payload_bytes() const {
    std::size_t n = 0;
    for (const auto* t : parameters()) n += t->payload_bytes();
    return n;
  }

  bool is_quantized() const {
    return conv1_kernel.dtype == DType::I8 || conv2_kernel.dtype == DType::I8 ||
           conv3_kernel.dtype == DType::I8 || dense_kernel.dtype == DType::I8;
  }

  /// Shape-checks every tensor against the architecture; the error names the layer.
  void validate() const {
    auto expect = [](const Tensor& t, std::string_view layer, std::vector<std::uint32_t> dims) {
      if (t.dims != dims) {
        throw Error(ErrorKind::ShapeMismatch, std::string(layer) + ": " + t.name + " has shape " +
                                                  shape_string(t.dims) + ", expected " + shape_string(dims));
      }
      const std::size_t stored = t.dtype == DType::F32 ? t.f32.size() : t.i8.size();
      if (stored != t.element_count()) {
        throw Error(ErrorKind::ShapeMismatch, std::string(layer) + ": " + t.name + " holds " +
                                                  std::to_string(stored) + " values for shape " +
                                                  shape_string(t.dims));
      }
    };
    expect(conv1_kernel, "conv1", {kKernelSize, kKernelSize, 1, kConv1Filters});
    expect(conv1_bias, "conv1", {kConv1Filters});
    expect(conv2_kernel, "conv2", {kKernelSize, kKernelSize, kConv1Filters, kConv2Filters});
    expect(conv2_bias, "conv2", {kConv2Filters});
    expect(conv3_kernel, "conv3", {kKernelSize, kKernelSize, kConv2Filters, kConv3Filters});
    expect(conv3_bias, "conv3", {kConv3Filters});
    for (const Tensor* t : {&bn_gamma, &bn_beta, &bn_moving_mean, &bn_moving_var}) {
      expect(*t, "bn", {kConv3Filters});
    }
    expect(dense_kernel, "dense", {kConv3Filters, 1});
    expect(dense_bias, "dense", {1});
    for (const Tensor* t : {&conv1_bias, &conv2_bias, &conv3_bias, &bn_gamma, &bn_beta, &bn_moving_mean,
                            &bn_moving_var, &dense_bias}) {
      if (t->dtype != DType::F32) {
        throw Error(ErrorKind::InvalidWeights, t->name + " must be stored as f32");
      }
    }
    for (float v : bn_moving_var.f32) {
      if (!(v >= 0.0f)) throw Error(ErrorKind::InvalidWeights, "bn: moving_var entry " + std::to_string(v) + " < 0");
    }
    if (!(bn_epsilon >= 0.0f)) throw Error(ErrorKind::InvalidWeights, "bn: epsilon must be >= 0");
    if (input_shape[0] != kInputMfcc || input_shape[2] != 1 || input_shape[1] == 0) {
      throw Error(ErrorKind::ShapeMismatch, "input: shape " + shape_string(input_shape) + ", expected 40xNx1");
    }
  }
};

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > bytes_.size() - pos_) {
      throw Error(ErrorKind::TruncatedFile, "need " + std::to_string(n) + " bytes at offset " +
                                                std::to_string(pos_) + ", " +
                                                std::to_string(bytes_.size() - pos_) + " left");
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    auto s = take(4);
    return static_cast<std::uint32_t>(s[0]) | (static_cast<std::uint32_t>(s[1]) << 8) |
           (static_cast<std::uint32_t>(s[2]) << 16) | (static_cast<std::uint32_t>(s[3]) << 24);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline void write_tensor(ByteWriter& w, const Tensor& t) {
  w.u8(static_cast<std::uint8_t>(t.name.size()));
  w.bytes(t.name.data(), t.name.size());
  w.u8(static_cast<std::uint8_t>(t.dtype));
  w.u8(static_cast<std::uint8_t>(t.dims.size()));
  for (auto d : t.dims) w.u32(d);
  if (t.dtype == DType::F32) {
    for (float v : t.f32) w.f32(v);
  } else {
    w.bytes(t.i8.data(), t.i8.size());
    w.f32(t.scale);
    w.u32(static_cast<std::uint32_t>(t.zero_point));
  }
}

inline Tensor read_tensor(ByteReader& r) {
  Tensor t;
  const auto name = r.take(r.u8());
  t.name.assign(name.begin(), name.end());
  const std::uint8_t dtype = r.u8();
  if (dtype > 1) throw Error(ErrorKind::InvalidWeights, t.name + ": unknown dtype " + std::to_string(dtype));
  t.dtype = static_cast<DType>(dtype);
  const std::uint8_t rank = r.u8();
  for (std::uint8_t i = 0; i < rank; ++i) t.dims.push_back(r.u32());
  const std::size_t n = t.element_count();
  if (t.dtype == DType::F32) {
    const auto raw = r.take(n * 4);
    t.f32.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, raw.data() + 4 * i, 4);
      t.f32[i] = std::bit_cast<float>(bits);  // little-endian host assumed
    }
  } else {
    const auto raw = r.take(n);
    t.i8.resize(n);
    std::memcpy(t.i8.data(), raw.data(), n);
    t.scale = r.f32();
    t.zero_point = static_cast<std::int32_t>(r.u32());
  }
  return t;
}

}  // namespace detail

inline constexpr std::uint32_t kWeightFormatVersion = 1;

inline std::vector<std::uint8_t> save_weights(const ModelWeights& weights) {
  weights.validate();
  detail::ByteWriter w;
  w.bytes("CGHW", 4);
  w.u32(kWeightFormatVersion);
  const auto params = weights.parameters();
  w.u32(static_cast<std::uint32_t>(params.size() + 2));
  for (const auto* t : params) detail::write_tensor(w, *t);
  Tensor eps = Tensor::zeros("bn.epsilon", {1});
  eps.f32[0] = weights.bn_epsilon;
  detail::write_tensor(w, eps);
  Tensor shape = Tensor::zeros("meta.input_shape", {3});
  for (std::size_t i = 0; i < 3; ++i) shape.f32[i] = static_cast<float>(weights.input_shape[i]);
  detail::write_tensor(w, shape);
  w.u32(crc32(w.buffer()));
  return std::move(w.buffer());
}

inline ModelWeights load_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) {
    throw Error(ErrorKind::TruncatedFile, std::to_string(bytes.size()) + " bytes is shorter than the header");
  }
  if (std::memcmp(bytes.data(), "CGHW", 4) != 0) throw Error(ErrorKind::BadMagic, "expected \"CGHW\"");
  detail::ByteReader r(bytes.first(bytes.size() - 4));
  r.take(4);
  const std::uint32_t version = r.u32();
  if (version != kWeightFormatVersion) {
    throw Error(ErrorKind::InvalidWeights, "unsupported format version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  std::vector<Tensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) tensors.push_back(detail::read_tensor(r));
  if (!r.done()) {
    throw Error(ErrorKind::InvalidWeights, "trailing bytes after tensor " + std::to_string(count));
  }
  const std::uint32_t stored = detail::ByteReader(bytes.last(4)).u32();
  if (stored != crc32(bytes.first(bytes.size() - 4))) {
    throw Error(ErrorKind::ChecksumMismatch, "CRC-32 does not match file contents");
  }

  ModelWeights w;
  auto take = [&](std::string_view name) -> Tensor {
    for (auto& t : tensors) {
      if (t.name == name) return std::move(t);
    }
    const auto layer = name.substr(0, name.find('.'));
    throw Error(ErrorKind::ShapeMismatch, std::string(layer) + ": missing tensor " + std::string(name));
  };
  w.conv1_kernel = take("conv1.kernel");
  w.conv1_bias = take("conv1.bias");
  w.conv2_kernel = take("conv2.kernel");
  w.conv2_bias = take("conv2.bias");
  w.conv3_kernel = take("conv3.kernel");
  w.conv3_bias = take("conv3.bias");
  w.bn_gamma = take("bn.gamma");
  w.bn_beta = take("bn.beta");
  w.bn_moving_mean = take("bn.moving_mean");
  w.bn_moving_var = take("bn.moving_var");
  w.dense_kernel = take("dense.kernel");
  w.dense_bias = take("dense.bias");
  const Tensor eps = take("bn.epsilon");
  if (eps.dtype != DType::F32 || eps.f32.size() != 1) {
    throw Error(ErrorKind::ShapeMismatch, "bn: epsilon must be a single f32");
  }
  w.bn_epsilon = eps.f32[0];
  const Tensor shape = take("meta.input_shape");
  if (shape.dtype != DType::F32 || shape.f32.size() != 3) {
    throw Error(ErrorKind::ShapeMismatch, "input: meta.input_shape must hold 3 f32 values");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const float v = shape.f32[i];
    if (!(v >= 0.0f && v < 1e9f && v == std::floor(v))) {
      throw Error(ErrorKind::ShapeMismatch, "input: non-integral dimension in meta.input_shape");
    }
    w.input_shape[i] = static_cast<std::uint32_t>(v);
  }
  w.validate();
  return w;
}

/// Untrained He-uniform weights from a seeded mt19937_64 (bit-stable across
/// standard libraries). Useful as a pipeline fixture until a trained file is
/// available; `dense_bias` shifts the decision.
inline ModelWeights init_weights(std::uint64_t seed, std::uint32_t n_frames = kDefaultInputFrames,
                                 float dense_bias = 0.0f) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return static_cast<float>(lo + (hi - lo) * u);
  };
  ModelWeights w = ModelWeights::zeros(n_frames);
  auto fill = [&](Tensor& t, double limit) {
    for (float& v : t.f32) v = uniform(-limit, limit);
  };
  fill(w.conv1_kernel, std::sqrt(6.0 / 9.0));
  fill(w.conv1_bias, 0.05);
  fill(w.conv2_kernel, std::sqrt(6.0 / (9.0 * kConv1Filters)));
  fill(w.conv2_bias, 0.05);
  fill(w.conv3_kernel, std::sqrt(6.0 / (9.0 * kConv2Filters)));
  fill(w.conv3_bias, 0.05);
  for (float& v : w.bn_gamma.f32) v = uniform(0.5, 1.5);
  fill(w.bn_beta, 0.1);
  for (float& v : w.bn_moving_mean.f32) v = uniform(0.0, 1.0);
  for (float& v : w.bn_moving_var.f32) v = uniform(0.5, 1.5);
  fill(w.dense_kernel, std::sqrt(6.0 / kConv3Filters));
  w.dense_bias.f32[0] = dense_bias;
  return w;
}

}  // namespace coughdet
