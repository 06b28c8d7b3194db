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
 * Description: Binary confusion counts, the SE/SP/PPV/NPV/F1 suite and
 * stratified train/validation/test apportionment.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "coughdet/error.hpp"

namespace coughdet {

struct ConfusionCounts {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// `true` means cough.
inline ConfusionCounts accumulate(ConfusionCounts c, bool predicted, bool actual) {
  if (predicted && actual) ++c.tp;
  else if (predicted) ++c.fp;
  else if (actual) ++c.fn;
  else ++c.tn;
  return c;
}

/// Rates are empty when their denominator is zero.
struct EvalReport {
  ConfusionCounts counts;
  std::optional<double> sensitivity, specificity, ppv, npv, f1;
};

inline std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

inline EvalReport metrics(const ConfusionCounts& c) {
  EvalReport r;
  r.counts = c;
  r.sensitivity = ratio(c.tp, c.tp + c.fn);
  r.specificity = ratio(c.tn, c.tn + c.fp);
  r.ppv = ratio(c.tp, c.tp + c.fp);
  r.npv = ratio(c.tn, c.tn + c.fn);
  if (r.sensitivity && r.ppv && (*r.sensitivity + *r.ppv) > 0.0) {
    r.f1 = 2.0 * (*r.sensitivity * *r.ppv) / (*r.sensitivity + *r.ppv);
  }
  return r;
}

inline std::string format_rate(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *v * 100.0);
  return buf;
}

inline std::string format_eval_table(const EvalReport& r, const std::string& title) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%s\n  TP %llu  TN %llu  FP %llu  FN %llu\n  SE %s  SP %s  PPV %s  NPV %s  F1 %s\n",
                title.c_str(), static_cast<unsigned long long>(r.counts.tp),
                static_cast<unsigned long long>(r.counts.tn), static_cast<unsigned long long>(r.counts.fp),
                static_cast<unsigned long long>(r.counts.fn), format_rate(r.sensitivity).c_str(),
                format_rate(r.specificity).c_str(), format_rate(r.ppv).c_str(), format_rate(r.npv).c_str(),
                format_rate(r.f1).c_str());
  return buf;
}

struct SplitFractions {
  double train = 0.72;
  double validation = 0.08;
  double test = 0.20;
};

template <class T>
struct Split {
  std::vector<T> train, validation, test;
};

/// Largest-remainder apportionment of `n` items over the three fractions;
/// remainder ties go to the larger fraction.
inline std::array<std::size_t, 3> apportion(std::size_t n, const SplitFractions& f) {
  const std::array<double, 3> frac{f.train, f.validation, f.test};
  std::array<std::size_t, 3> out{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = static_cast<double>(n) * frac[i];
    out[i] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    rem[i] = std::max(0.0, quota - static_cast<double>(out[i]));
    assigned += out[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(rem[a] - rem[b]) > 1e-9) return rem[a] > rem[b];
    return frac[a] > frac[b];
  });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 3, ++assigned) ++out[order[k]];
  return out;
}

namespace detail {

// Fisher-Yates over mt19937_64 with rejection sampling; unlike std::shuffle
// the permutation is identical across standard library implementations.
template <class T>
void stable_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do x = rng(); while (x >= limit);
    std::swap(v[i - 1], v[static_cast<std::size_t>(x % bound)]);
  }
}

}  // namespace detail

/// Per-class shuffled apportionment. `is_positive(sample)` gives the class.
template <class T, class IsPositive>
Split<T> stratified_split(std::span<const T> samples, IsPositive is_positive, std::uint64_t seed,
                          const SplitFractions& fractions = {}) {
  std::array<std::vector<T>, 2> classes;
  for (const auto& s : samples) classes[is_positive(s) ? 1 : 0].push_back(s);
  if (classes[0].empty() || classes[1].empty()) {
    throw Error(ErrorKind::EmptyClass, classes[1].empty() ? "no positive samples" : "no negative samples");
  }
  std::mt19937_64 rng(seed);
  Split<T> out;
  for (auto& members : classes) {
    detail::stable_shuffle(members, rng);
    const auto sizes = apportion(members.size(), fractions);
    auto it = members.begin();
    auto move_n = [&](std::vector<T>& dst, std::size_t n) {
      dst.insert(dst.end(), it, it + static_cast<std::ptrdiff_t>(n));
      it += static_cast<std::ptrdiff_t>(n);
    };
    move_n(out.train, sizes[0]);
    move_n(out.validation, sizes[1]);
    move_n(out.test, sizes[2]);
  }
  return out;
}

}  // namespace coughdet
