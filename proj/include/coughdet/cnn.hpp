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
 * Description: Float32 forward pass of the cough classifier.
 *
 *   (40, F, 1) -conv3x3/2+ReLU-> 16 -conv3x3/2+ReLU-> 32 -conv3x3/2+ReLU-> 40
 *   -> global max pool -> batch norm -> dense(1) -> sigmoid
 *
 * Dropout layers of the training graph are identity at inference and do not
 * appear here.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coughdet/error.hpp"
#include "coughdet/mfcc.hpp"
#include "coughdet/weights.hpp"

namespace coughdet {

/// Activation map in HWC order.
struct Activation {
  std::size_t h = 0, w = 0, c = 0;
  std::vector<float> data;

  Activation() = default;
  Activation(std::size_t h_, std::size_t w_, std::size_t c_) : h(h_), w(w_), c(c_), data(h_ * w_ * c_, 0.0f) {}

  float& at(std::size_t y, std::size_t x, std::size_t ch) { return data[(y * w + x) * c + ch]; }
  float at(std::size_t y, std::size_t x, std::size_t ch) const { return data[(y * w + x) * c + ch]; }

  std::vector<std::size_t> shape() const { return {h, w, c}; }
};

inline constexpr std::size_t conv_output_extent(std::size_t in) {
  return in < kKernelSize ? 0 : (in - kKernelSize) / 2 + 1;
}

/// 3x3 convolution, stride 2 on both axes, valid padding, bias then ReLU.
/// `kernel` is laid out 3x3xCxF with F = bias.size().
inline Activation conv2d_valid_s2(const Activation& in, std::span<const float> kernel,
                                  std::span<const float> bias) {
  if (in.h < kKernelSize || in.w < kKernelSize) {
    throw Error(ErrorKind::InputTooSmall, "conv input " + std::to_string(in.h) + "x" + std::to_string(in.w) +
                                              " is smaller than the 3x3 kernel");
  }
  const std::size_t filters = bias.size();
  if (kernel.size() != kKernelSize * kKernelSize * in.c * filters) {
    throw Error(ErrorKind::ShapeMismatch, "kernel holds " + std::to_string(kernel.size()) + " values, expected 3x3x" +
                                              std::to_string(in.c) + "x" + std::to_string(filters));
  }
  Activation out(conv_output_extent(in.h), conv_output_extent(in.w), filters);
  std::vector<float> acc(filters);
  for (std::size_t oy = 0; oy < out.h; ++oy) {
    for (std::size_t ox = 0; ox < out.w; ++ox) {
      std::copy(bias.begin(), bias.end(), acc.begin());
      for (std::size_t ky = 0; ky < kKernelSize; ++ky) {
        for (std::size_t kx = 0; kx < kKernelSize; ++kx) {
          const float* src = &in.data[((2 * oy + ky) * in.w + (2 * ox + kx)) * in.c];
          const float* k = &kernel[(ky * kKernelSize + kx) * in.c * filters];
          for (std::size_t ci = 0; ci < in.c; ++ci) {
            const float x = src[ci];
            const float* kr = k + ci * filters;
            for (std::size_t f = 0; f < filters; ++f) acc[f] += x * kr[f];
          }
        }
      }
      float* dst = &out.data[(oy * out.w + ox) * filters];
      for (std::size_t f = 0; f < filters; ++f) dst[f] = std::max(acc[f], 0.0f);
    }
  }
  return out;
}

inline std::vector<float> global_max_pool(const Activation& in) {
  if (in.h == 0 || in.w == 0) throw Error(ErrorKind::InputTooSmall, "global max pool over an empty map");
  std::vector<float> out(in.c, -std::numeric_limits<float>::infinity());
  for (std::size_t p = 0; p < in.h * in.w; ++p) {
    for (std::size_t ch = 0; ch < in.c; ++ch) out[ch] = std::max(out[ch], in.data[p * in.c + ch]);
  }
  return out;
}

struct BatchNormParams {
  std::span<const float> gamma, beta, moving_mean, moving_var;
  float epsilon = 1e-3f;

  static BatchNormParams from(const ModelWeights& w) {
    return {w.bn_gamma.f32, w.bn_beta.f32, w.bn_moving_mean.f32, w.bn_moving_var.f32, w.bn_epsilon};
  }
};

inline std::vector<float> batch_norm_inference(std::span<const float> v, const BatchNormParams& bn) {
  if (bn.gamma.size() != v.size() || bn.beta.size() != v.size() || bn.moving_mean.size() != v.size() ||
      bn.moving_var.size() != v.size()) {
    throw Error(ErrorKind::ShapeMismatch, "bn: parameter length differs from input length " + std::to_string(v.size()));
  }
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = bn.gamma[i] * (v[i] - bn.moving_mean[i]) / std::sqrt(bn.moving_var[i] + bn.epsilon) + bn.beta[i];
  }
  return out;
}

/// Logistic function evaluated in double and kept inside the open unit
/// interval so that a probability is never exactly 0 or 1.
inline double sigmoid(double x) {
  const double p = 1.0 / (1.0 + std::exp(-x));
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

struct LayerTrace {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> values;
};

struct InferenceResult {
  double probability = 0.0;
  double logit = 0.0;
  bool cough = false;
  std::vector<LayerTrace> layer_activations;  // filled only when tracing
};

inline Activation features_to_activation(const MfccMatrix& features, const ModelWeights& weights) {
  if (features.n_mfcc != weights.input_shape[0] || features.n_frames != weights.input_shape[1]) {
    throw Error(ErrorKind::ShapeMismatch, "features are " + std::to_string(features.n_mfcc) + "x" +
                                              std::to_string(features.n_frames) + ", weights expect " +
                                              shape_string(weights.input_shape));
  }
  Activation a(features.n_mfcc, features.n_frames, 1);
  a.data = features.coefficients;  // row-major (mfcc, frame) == HWC with C = 1
  return a;
}

struct ForwardOptions {
  double decision_threshold = 0.5;
  bool trace = false;
};

inline InferenceResult forward(const MfccMatrix& features, const ModelWeights& weights,
                               const ForwardOptions& options = {}) {
  InferenceResult result;
  auto trace = [&](std::string name, std::vector<std::size_t> shape, const std::vector<float>& values) {
    if (options.trace) result.layer_activations.push_back({std::move(name), std::move(shape), values});
  };
  Activation a = features_to_activation(features, weights);
  trace("input", a.shape(), a.data);
  a = conv2d_valid_s2(a, weights.conv1_kernel.to_float(), weights.conv1_bias.f32);
  trace("conv1", a.shape(), a.data);
  a = conv2d_valid_s2(a, weights.conv2_kernel.to_float(), weights.conv2_bias.f32);
  trace("conv2", a.shape(), a.data);
  a = conv2d_valid_s2(a, weights.conv3_kernel.to_float(), weights.conv3_bias.f32);
  trace("conv3", a.shape(), a.data);
  const auto pooled = global_max_pool(a);
  trace("global_max_pool", {pooled.size()}, pooled);
  const auto normed = batch_norm_inference(pooled, BatchNormParams::from(weights));
  trace("batch_norm", {normed.size()}, normed);
  const auto dense = weights.dense_kernel.to_float();
  float z = weights.dense_bias.f32[0];
  for (std::size_t i = 0; i < normed.size(); ++i) z += normed[i] * dense[i];
  trace("dense", {1}, {z});
  result.logit = z;
  result.probability = sigmoid(z);
  result.cough = result.probability >= options.decision_threshold;
  return result;
}

}  // namespace coughdet
