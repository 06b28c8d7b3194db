// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace coughdet;

TEST(Accumulate, Basics) {
  EXPECT_EQ(accumulate({}, true, true).tp, 1u);
  EXPECT_EQ(accumulate({}, true, false).fp, 1u);
  EXPECT_EQ(accumulate({}, false, true).fn, 1u);
  EXPECT_EQ(accumulate({}, false, false).tn, 1u);
}

TEST(Accumulate, RandomRecount) {
  std::mt19937_64 rng(1);
  ConfusionCounts c;
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (int i = 0; i < 100; ++i) {
    const bool p = rng() & 1, a = rng() & 1;
    c = accumulate(c, p, a);
    tp += p && a;
    tn += !p && !a;
    fp += p && !a;
    fn += !p && a;
  }
  EXPECT_EQ(c.total(), 100u);
  EXPECT_EQ(c, (ConfusionCounts{tp, tn, fp, fn}));
}

TEST(Metrics, WorkedExample) {
  const auto r = metrics({44, 79, 1, 1});
  EXPECT_NEAR(*r.sensitivity * 100.0, 97.78, 0.01);
  EXPECT_NEAR(*r.specificity * 100.0, 98.75, 0.01);
  EXPECT_EQ(format_rate(r.sensitivity), "97.78%");
  EXPECT_EQ(format_rate(r.specificity), "98.75%");
}

TEST(Metrics, HalfSensitivity) { EXPECT_EQ(*metrics({7, 3, 2, 7}).sensitivity, 0.5); }

TEST(Metrics, UndefinedRates) {
  const auto r = metrics({0, 5, 0, 3});
  EXPECT_FALSE(r.ppv.has_value());
  EXPECT_FALSE(r.f1.has_value());
  EXPECT_EQ(format_rate(r.ppv), "undefined");
  const auto z = metrics({});
  EXPECT_FALSE(z.sensitivity || z.specificity || z.ppv || z.npv || z.f1);
  const auto no_neg = metrics({4, 0, 0, 1});
  EXPECT_FALSE(no_neg.specificity.has_value());
  EXPECT_TRUE(no_neg.sensitivity.has_value());
}

TEST(Metrics, MatchesFormulasAndBounds) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::uint64_t> d(0, 50);
  for (int i = 0; i < 10000; ++i) {
    const ConfusionCounts c{d(rng), d(rng), d(rng), d(rng)};
    const auto r = metrics(c);
    auto check = [](const std::optional<double>& got, std::uint64_t num, std::uint64_t den) {
      if (den == 0) {
        EXPECT_FALSE(got.has_value());
      } else {
        ASSERT_TRUE(got.has_value());
        EXPECT_EQ(*got, static_cast<double>(num) / static_cast<double>(den));
        EXPECT_GE(*got, 0.0);
        EXPECT_LE(*got, 1.0);
      }
    };
    check(r.sensitivity, c.tp, c.tp + c.fn);
    check(r.specificity, c.tn, c.tn + c.fp);
    check(r.ppv, c.tp, c.tp + c.fp);
    check(r.npv, c.tn, c.tn + c.fn);
    if (r.sensitivity && r.ppv && *r.sensitivity > 0 && *r.ppv > 0) {
      ASSERT_TRUE(r.f1.has_value());
      const double lo = std::min(*r.sensitivity, *r.ppv);
      EXPECT_EQ(*r.f1, 2.0 * (*r.sensitivity * *r.ppv) / (*r.sensitivity + *r.ppv));
      EXPECT_LE(*r.f1, 2.0 * lo + 1e-15);
      EXPECT_GE(*r.f1, lo - 1e-15);
    }
  }
}

TEST(Apportion, Exact) {
  const auto a = apportion(100, {});
  EXPECT_EQ(a, (std::array<std::size_t, 3>{72, 8, 20}));
}

TEST(Apportion, LargestRemainderOracle) {
  for (std::size_t n = 0; n < 300; ++n) {
    const auto a = apportion(n, {});
    EXPECT_EQ(a[0] + a[1] + a[2], n);
    const std::array<double, 3> f{0.72, 0.08, 0.20};
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_LE(std::abs(static_cast<double>(a[i]) - static_cast<double>(n) * f[i]), 1.0) << n;
    }
  }
  const auto ten = apportion(10, {});
  EXPECT_EQ(ten, (std::array<std::size_t, 3>{7, 1, 2}));
}

TEST(StratifiedSplit, ExactSizes) {
  std::vector<int> items(200);
  std::iota(items.begin(), items.end(), 0);
  const auto s = stratified_split<int>(items, [](int x) { return x < 100; }, 7);
  EXPECT_EQ(s.train.size(), 144u);
  EXPECT_EQ(s.validation.size(), 16u);
  EXPECT_EQ(s.test.size(), 40u);
  EXPECT_EQ(std::count_if(s.train.begin(), s.train.end(), [](int x) { return x < 100; }), 72);
  EXPECT_EQ(std::count_if(s.test.begin(), s.test.end(), [](int x) { return x < 100; }), 20);
}

TEST(StratifiedSplit, PartitionAndDeterminism) {
  std::vector<int> items(20);
  std::iota(items.begin(), items.end(), 0);
  auto pos = [](int x) { return x % 2 == 0; };
  const auto a = stratified_split<int>(items, pos, 99);
  const auto b = stratified_split<int>(items, pos, 99);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.test, b.test);
  std::multiset<int> all(a.train.begin(), a.train.end());
  all.insert(a.validation.begin(), a.validation.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all, std::multiset<int>(items.begin(), items.end()));
  EXPECT_EQ(std::count_if(a.train.begin(), a.train.end(), pos), 7);
  EXPECT_EQ(std::count_if(a.validation.begin(), a.validation.end(), pos), 1);
  EXPECT_EQ(std::count_if(a.test.begin(), a.test.end(), pos), 2);
}

TEST(StratifiedSplit, EmptyClass) {
  const std::vector<int> items{1, 2, 3};
  try {
    stratified_split<int>(items, [](int) { return true; }, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyClass);
  }
}
