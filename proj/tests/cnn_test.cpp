// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "support.hpp"

using namespace coughdet;
using namespace coughdet::testing;

namespace {

Activation random_activation(std::mt19937_64& rng, std::size_t h, std::size_t w, std::size_t c) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Activation a(h, w, c);
  for (auto& v : a.data) v = u(rng);
  return a;
}

std::vector<float> random_vector(std::mt19937_64& rng, std::size_t n, float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> u(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Conv, OutputShapes) {
  EXPECT_EQ(conv_output_extent(40), 19u);
  EXPECT_EQ(conv_output_extent(267), 133u);
  EXPECT_EQ(conv_output_extent(19), 9u);
  EXPECT_EQ(conv_output_extent(133), 66u);
  EXPECT_EQ(conv_output_extent(9), 4u);
  EXPECT_EQ(conv_output_extent(66), 32u);
  EXPECT_EQ(conv_output_extent(2), 0u);

  const auto a = conv2d_valid_s2(Activation(40, 267, 1), std::vector<float>(9 * 16), std::vector<float>(16));
  EXPECT_EQ(a.shape(), (std::vector<std::size_t>{19, 133, 16}));
  const auto b = conv2d_valid_s2(a, std::vector<float>(9 * 16 * 32), std::vector<float>(32));
  EXPECT_EQ(b.shape(), (std::vector<std::size_t>{9, 66, 32}));
  const auto c = conv2d_valid_s2(b, std::vector<float>(9 * 32 * 40), std::vector<float>(40));
  EXPECT_EQ(c.shape(), (std::vector<std::size_t>{4, 32, 40}));
}

TEST(Conv, ZeroInZeroOut) {
  std::mt19937_64 rng(1);
  const auto out = conv2d_valid_s2(Activation(11, 13, 3), random_vector(rng, 9 * 3 * 5), std::vector<float>(5, 0.0f));
  for (float v : out.data) ASSERT_EQ(v, 0.0f);
}

TEST(Conv, MatchesBruteForce) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> dim(3, 12), ch(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = ch(rng), f = ch(rng);
    const auto in = random_activation(rng, dim(rng), dim(rng), c);
    const auto k = random_vector(rng, 9 * c * f);
    const auto b = random_vector(rng, f, -0.5f, 0.5f);
    const auto got = conv2d_valid_s2(in, k, b);
    const auto want = conv_oracle(in, k, b);
    ASSERT_EQ(got.shape(), want.shape());
    for (std::size_t i = 0; i < got.data.size(); ++i) {
      ASSERT_LE(std::abs(got.data[i] - want.data[i]), 1e-5 * std::max(std::abs(want.data[i]), 1.0f));
    }
  }
}

TEST(Conv, Errors) {
  EXPECT_THROW(conv2d_valid_s2(Activation(2, 10, 1), std::vector<float>(9), std::vector<float>(1)), Error);
  try {
    conv2d_valid_s2(Activation(8, 8, 2), std::vector<float>(9), std::vector<float>(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

TEST(MaxPool, SingletonIsIdentity) {
  std::mt19937_64 rng(2);
  Activation a(1, 1, 40);
  a.data = random_vector(rng, 40);
  EXPECT_EQ(global_max_pool(a), a.data);
}

TEST(MaxPool, PicksChannelMaximum) {
  Activation a(1, 3, 1);
  a.data = {-3.0f, 5.0f, 0.0f};
  EXPECT_EQ(global_max_pool(a), std::vector<float>{5.0f});
}

TEST(MaxPool, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  const auto a = random_activation(rng, 4, 32, 40);
  const auto got = global_max_pool(a);
  for (std::size_t ch = 0; ch < 40; ++ch) {
    float m = a.at(0, 0, ch);
    for (std::size_t y = 0; y < 4; ++y) {
      for (std::size_t x = 0; x < 32; ++x) m = std::max(m, a.at(y, x, ch));
    }
    EXPECT_EQ(got[ch], m);
  }
}

TEST(BatchNorm, IdentityAndMeanInputs) {
  std::mt19937_64 rng(4);
  const auto v = random_vector(rng, 40);
  const std::vector<float> ones(40, 1.0f), zeros(40, 0.0f);
  EXPECT_EQ(batch_norm_inference(v, {ones, zeros, zeros, ones, 0.0f}), v);

  const auto mean = random_vector(rng, 40), beta = random_vector(rng, 40), gamma = random_vector(rng, 40);
  const auto var = random_vector(rng, 40, 0.1f, 2.0f);
  EXPECT_EQ(batch_norm_inference(mean, {gamma, beta, mean, var, 1e-3f}), beta);
}

TEST(BatchNorm, MatchesScalarFormula) {
  std::mt19937_64 rng(5);
  const auto v = random_vector(rng, 40), gamma = random_vector(rng, 40), beta = random_vector(rng, 40);
  const auto mean = random_vector(rng, 40), var = random_vector(rng, 40, 0.1f, 2.0f);
  const auto out = batch_norm_inference(v, {gamma, beta, mean, var, 1e-3f});
  for (std::size_t i = 0; i < 40; ++i) {
    const double want = static_cast<double>(gamma[i]) * (v[i] - mean[i]) / std::sqrt(static_cast<double>(var[i]) + 1e-3) + beta[i];
    EXPECT_NEAR(out[i], want, 1e-5);
  }
}

TEST(Sigmoid, RangeAndMonotonicity) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  double prev = 0.0;
  for (double x = -30.0; x <= 30.0; x += 0.25) {
    const double p = sigmoid(x);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
    EXPECT_GT(p, prev);
    prev = p;
  }
  EXPECT_GT(sigmoid(-1e6), 0.0);
  EXPECT_LT(sigmoid(1e6), 1.0);
}

TEST(Forward, ZeroModelGivesHalf) {
  const auto w = ModelWeights::zeros();
  MfccMatrix f(40, 267, MfccConfig{});
  w.validate();
  ModelWeights identity_bn = w;
  identity_bn.bn_epsilon = 0.0f;
  EXPECT_EQ(forward(f, identity_bn).probability, 0.5);
}

TEST(Forward, ShapeChainAndParameterCounts) {
  const auto w = init_weights(42);
  EXPECT_EQ(w.conv1_kernel.element_count() + w.conv1_bias.element_count(), 160u);
  EXPECT_EQ(w.conv2_kernel.element_count() + w.conv2_bias.element_count(), 4640u);
  EXPECT_EQ(w.conv3_kernel.element_count() + w.conv3_bias.element_count(), 11560u);
  EXPECT_EQ(w.bn_gamma.element_count() * 4, 160u);
  EXPECT_EQ(w.dense_kernel.element_count() + w.dense_bias.element_count(), 41u);
  EXPECT_EQ(w.parameter_count(), 16561u);
  EXPECT_EQ(w.non_trainable_count(), 80u);

  std::mt19937_64 rng(1);
  ForwardOptions opts;
  opts.trace = true;
  const auto r = forward(random_features(rng), w, opts);
  const std::vector<std::pair<std::string, std::vector<std::size_t>>> want{
      {"input", {40, 267, 1}}, {"conv1", {19, 133, 16}}, {"conv2", {9, 66, 32}}, {"conv3", {4, 32, 40}},
      {"global_max_pool", {40}}, {"batch_norm", {40}}, {"dense", {1}}};
  ASSERT_EQ(r.layer_activations.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(r.layer_activations[i].name, want[i].first);
    EXPECT_EQ(r.layer_activations[i].shape, want[i].second);
  }
}

TEST(Forward, ProbabilityInOpenInterval) {
  std::mt19937_64 rng(6);
  for (float bias : {-1000.0f, -5.0f, 0.0f, 5.0f, 1000.0f}) {
    const auto w = init_weights(3, kDefaultInputFrames, bias);
    const auto p = forward(random_features(rng), w).probability;
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(Forward, DenseBiasMonotone) {
  std::mt19937_64 rng(7);
  const auto f = random_features(rng);
  double prev = 0.0;
  for (float bias = -6.0f; bias <= 6.0f; bias += 0.5f) {
    const double p = forward(f, init_weights(3, kDefaultInputFrames, bias)).probability;
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(Forward, FeatureShapeMismatch) {
  MfccMatrix f(40, 29, MfccConfig{});
  try {
    forward(f, init_weights(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

TEST(Forward, ShorterInputsFollowTheShapeGenericChain) {
  const auto w = init_weights(5, 29);
  std::mt19937_64 rng(2);
  ForwardOptions opts;
  opts.trace = true;
  const auto r = forward(random_features(rng, 29), w, opts);
  EXPECT_EQ(r.layer_activations[3].shape, (std::vector<std::size_t>{4, 2, 40}));
}

TEST(Forward, GoldenProbability) {
  std::mt19937_64 rng(2026);
  const auto f = random_features(rng);
  const auto w = init_weights(7);
  const auto a = forward(f, w);
  EXPECT_EQ(a.probability, forward(f, w).probability);
  EXPECT_EQ(a.probability, 0x1.ffac3537e0ee4p-1) << std::hexfloat << a.probability;
}
