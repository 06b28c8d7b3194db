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
 * Description: Post-training int8 quantization. Kernels use a symmetric
 * per-tensor scale (zero point 0); biases and batch-norm parameters stay
 * float. The int8 forward path quantizes each layer's input activations on
 * the fly from their observed range and accumulates in int32.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "coughdet/cnn.hpp"
#include "coughdet/error.hpp"
#include "coughdet/weights.hpp"

namespace coughdet {

struct QuantizedTensor {
  std::vector<std::int8_t> values;
  float scale = 1.0f;
  std::int32_t zero_point = 0;
  std::vector<std::uint32_t> original_shape;

  std::vector<float> dequantize() const {
    std::vector<float> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      out[i] = scale * static_cast<float>(static_cast<std::int32_t>(values[i]) - zero_point);
    }
    return out;
  }
};

/// Symmetric scheme: scale = max|t| / 127, values = round(t / scale) in
/// [-127, 127]. An all-zero tensor gets scale 1.
inline QuantizedTensor quantize_tensor(std::span<const float> t, std::vector<std::uint32_t> shape = {}) {
  if (t.empty()) throw Error(ErrorKind::InvalidConfig, "cannot quantize an empty tensor");
  float peak = 0.0f;
  for (float v : t) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "tensor holds a non-finite value");
    peak = std::max(peak, std::abs(v));
  }
  QuantizedTensor q;
  q.original_shape = shape.empty() ? std::vector<std::uint32_t>{static_cast<std::uint32_t>(t.size())} : std::move(shape);
  q.scale = peak > 0.0f ? peak / 127.0f : 1.0f;
  q.values.resize(t.size());
  const double inv = 1.0 / static_cast<double>(q.scale);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = std::nearbyint(static_cast<double>(t[i]) * inv);
    q.values[i] = static_cast<std::int8_t>(std::clamp(r, -127.0, 127.0));
  }
  return q;
}

inline Tensor quantize_weight_tensor(const Tensor& t) {
  if (t.dtype == DType::I8) return t;
  const auto q = quantize_tensor(t.f32, t.dims);
  Tensor out;
  out.name = t.name;
  out.dtype = DType::I8;
  out.dims = t.dims;
  out.i8 = q.values;
  out.scale = q.scale;
  out.zero_point = q.zero_point;
  return out;
}

/// Quantizes the conv and dense kernels; already-quantized kernels pass through.
inline ModelWeights quantize_model(const ModelWeights& w) {
  w.validate();
  ModelWeights q = w;
  for (Tensor* t : {&q.conv1_kernel, &q.conv2_kernel, &q.conv3_kernel, &q.dense_kernel}) {
    *t = quantize_weight_tensor(*t);
  }
  return q;
}

namespace detail {

// Per-call symmetric activation quantization.
struct QuantizedActivations {
  std::vector<std::int8_t> values;
  float scale = 1.0f;
};

inline QuantizedActivations quantize_activations(std::span<const float> a) {
  const auto q = quantize_tensor(a);
  return {q.values, q.scale};
}

inline std::vector<std::int8_t> kernel_values(const Tensor& kernel) {
  if (kernel.dtype != DType::I8) {
    throw Error(ErrorKind::InvalidWeights, kernel.name + " is not int8; run quantize_model first");
  }
  return kernel.i8;
}

inline Activation conv2d_valid_s2_int8(const Activation& in, const Tensor& kernel, std::span<const float> bias) {
  if (in.h < kKernelSize || in.w < kKernelSize) {
    throw Error(ErrorKind::InputTooSmall, "conv input smaller than the 3x3 kernel");
  }
  const auto k = kernel_values(kernel);
  const std::size_t filters = bias.size();
  if (k.size() != kKernelSize * kKernelSize * in.c * filters) {
    throw Error(ErrorKind::ShapeMismatch, kernel.name + " does not match the layer input");
  }
  const auto act = quantize_activations(in.data);
  const float rescale = act.scale * kernel.scale;
  const std::int32_t kzp = kernel.zero_point;
  Activation out(conv_output_extent(in.h), conv_output_extent(in.w), filters);
  std::vector<std::int32_t> acc(filters);
  for (std::size_t oy = 0; oy < out.h; ++oy) {
    for (std::size_t ox = 0; ox < out.w; ++ox) {
      std::fill(acc.begin(), acc.end(), 0);
      for (std::size_t ky = 0; ky < kKernelSize; ++ky) {
        for (std::size_t kx = 0; kx < kKernelSize; ++kx) {
          const std::int8_t* src = &act.values[((2 * oy + ky) * in.w + (2 * ox + kx)) * in.c];
          const std::int8_t* kr = &k[(ky * kKernelSize + kx) * in.c * filters];
          for (std::size_t ci = 0; ci < in.c; ++ci) {
            const std::int32_t x = src[ci];
            for (std::size_t f = 0; f < filters; ++f) {
              acc[f] += x * (static_cast<std::int32_t>(kr[ci * filters + f]) - kzp);
            }
          }
        }
      }
      float* dst = &out.data[(oy * out.w + ox) * filters];
      for (std::size_t f = 0; f < filters; ++f) {
        dst[f] = std::max(static_cast<float>(acc[f]) * rescale + bias[f], 0.0f);
      }
    }
  }
  return out;
}

}  // namespace detail

inline InferenceResult forward_quantized(const MfccMatrix& features, const ModelWeights& qw,
                                         const ForwardOptions& options = {}) {
  InferenceResult result;
  auto trace = [&](std::string name, std::vector<std::size_t> shape, const std::vector<float>& values) {
    if (options.trace) result.layer_activations.push_back({std::move(name), std::move(shape), values});
  };
  Activation a = features_to_activation(features, qw);
  trace("input", a.shape(), a.data);
  a = detail::conv2d_valid_s2_int8(a, qw.conv1_kernel, qw.conv1_bias.f32);
  trace("conv1", a.shape(), a.data);
  a = detail::conv2d_valid_s2_int8(a, qw.conv2_kernel, qw.conv2_bias.f32);
  trace("conv2", a.shape(), a.data);
  a = detail::conv2d_valid_s2_int8(a, qw.conv3_kernel, qw.conv3_bias.f32);
  trace("conv3", a.shape(), a.data);
  const auto pooled = global_max_pool(a);
  trace("global_max_pool", {pooled.size()}, pooled);
  const auto normed = batch_norm_inference(pooled, BatchNormParams::from(qw));
  trace("batch_norm", {normed.size()}, normed);

  const auto k = detail::kernel_values(qw.dense_kernel);
  const auto act = detail::quantize_activations(normed);
  std::int32_t acc = 0;
  for (std::size_t i = 0; i < normed.size(); ++i) {
    acc += static_cast<std::int32_t>(act.values[i]) * (static_cast<std::int32_t>(k[i]) - qw.dense_kernel.zero_point);
  }
  const float z = static_cast<float>(acc) * act.scale * qw.dense_kernel.scale + qw.dense_bias.f32[0];
  trace("dense", {1}, {z});
  result.logit = z;
  result.probability = sigmoid(z);
  result.cough = result.probability >= options.decision_threshold;
  return result;
}

/// Dispatches on the stored kernel dtype.
inline InferenceResult infer(const MfccMatrix& features, const ModelWeights& w, const ForwardOptions& options = {}) {
  return w.is_quantized() ? forward_quantized(features, w, options) : forward(features, w, options);
}

}  // namespace coughdet
