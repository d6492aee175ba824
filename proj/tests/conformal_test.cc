/*
 * Copyright 2026 The cui Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cui/conformal.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cui/error.h"
#include "oracles.h"

namespace cui {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ProbabilityVector pv(std::vector<double> p) { return ProbabilityVector::from(std::move(p)); }

TEST(Softmax, Examples) {
  const std::vector<double> z0 = {0.0, 0.0};
  auto p = softmax(z0);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);

  const std::vector<double> big = {1000.0, 1000.0, 1000.0};
  p = softmax(big);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p[i], 1.0 / 3.0, 1e-15);

  const std::vector<double> ln2 = {std::log(2.0), 0.0};
  p = softmax(ln2);
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
}

TEST(Softmax, RejectsBadInput) {
  const std::vector<double> one = {1.0};
  EXPECT_THROW(softmax(one), Error);
  const std::vector<double> nan = {0.0, std::nan("")};
  EXPECT_THROW(softmax(nan), Error);
  EXPECT_THROW(pv({0.5, 0.6}), Error);
  EXPECT_THROW(pv({1.2, -0.2}), Error);
}

TEST(Softmax, MatchesDirectFormula) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> z(2 + t % 9);
    for (double& v : z) v = n(rng);
    const auto p = softmax(z);
    const auto q = oracle::softmax(z);
    for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-15);
  }
}

TEST(NonconformityScore, Examples) {
  const auto p = pv({0.7, 0.2, 0.1});
  EXPECT_DOUBLE_EQ(nonconformity_score(p, 0), 1.0 - 0.7);
  EXPECT_DOUBLE_EQ(nonconformity_score(p, 2), 1.0 - 0.1);
  const auto u = pv({0.25, 0.25, 0.25, 0.25});
  for (int y = 0; y < 4; ++y) EXPECT_DOUBLE_EQ(nonconformity_score(u, y), 0.75);
  EXPECT_THROW(nonconformity_score(p, 3), Error);
  EXPECT_THROW(nonconformity_score(p, -1), Error);
}

TEST(NonconformityScore, ArgmaxHasMinimalScore) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> z(10);
    for (double& v : z) v = n(rng);
    const auto p = softmax(z);
    const double best = nonconformity_score(p, argmax(p));
    for (int y = 0; y < 10; ++y) EXPECT_LE(best, nonconformity_score(p, y));
  }
}

TEST(ConformalQuantile, Examples) {
  const std::vector<double> s = {0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(conformal_quantile(s, 0.75).value, 0.4);
  const std::vector<double> c = {0.37, 0.37, 0.37};
  for (double level : {0.01, 0.5, 0.99}) EXPECT_EQ(conformal_quantile(c, level).value, 0.37);
  const std::vector<double> one = {0.5};
  EXPECT_EQ(conformal_quantile(one, 0.9).value, 0.5);
  // level 0.05 over 5 slots: k = 1.
  EXPECT_EQ(conformal_quantile(s, 0.05).value, 0.1);
}

TEST(ConformalQuantile, LevelOnAnIntegerRankIsNotRoundedUp) {
  // 5 * 0.8 is 4 in exact arithmetic; the k-th slot must not become k+1.
  const std::vector<double> s = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  EXPECT_EQ(conformal_quantile(s, 0.7).value, 0.7);  // 10 * 0.7 = 7
  EXPECT_EQ(conformal_quantile(std::vector<double>{0.1, 0.2, 0.3, 0.4}, 0.8).value, 0.4);
}

TEST(ConformalQuantile, Errors) {
  const std::vector<double> empty;
  try {
    conformal_quantile(empty, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCalibration);
  }
  const std::vector<double> s = {0.1};
  EXPECT_THROW(conformal_quantile(s, 0.0), Error);
  EXPECT_THROW(conformal_quantile(s, 1.0), Error);
}

TEST(ConformalQuantile, EqualsSortAndIndexOracle) {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<int> size(1, 300);
  std::uniform_int_distribution<int> permille(1, 999);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> s(static_cast<std::size_t>(size(rng)));
    // Some instances get heavy ties.
    for (double& v : s) v = t % 4 == 0 ? std::round(u(rng) * 5) / 5 : u(rng);
    const double level = permille(rng) / 1000.0;
    const Threshold th = conformal_quantile(s, level);
    EXPECT_EQ(th.value, oracle::sorted_quantile(s, level)) << "instance " << t;
    EXPECT_EQ(th.level, level);
  }
}

TEST(WeightedQuantile, Examples) {
  const std::vector<double> s = {0.2, 0.8};
  const std::vector<double> w = {1.0, 0.0};
  EXPECT_EQ(weighted_quantile(s, w, 0.4).value, 0.2);
  const std::vector<double> s1 = {0.2};
  const std::vector<double> w1 = {1.0};
  const Threshold t = weighted_quantile(s1, w1, 0.9);
  EXPECT_TRUE(t.is_unbounded());
  EXPECT_EQ(t.value, kInf);
}

TEST(WeightedQuantile, Errors) {
  const std::vector<double> s = {0.2, 0.3};
  EXPECT_THROW(weighted_quantile(s, std::vector<double>{1.0}, 0.5), Error);
  EXPECT_THROW(weighted_quantile(s, std::vector<double>{0.0, 0.0}, 0.5), Error);
  EXPECT_THROW(weighted_quantile(s, std::vector<double>{-1.0, 2.0}, 0.5), Error);
  EXPECT_THROW(weighted_quantile(std::vector<double>{}, std::vector<double>{}, 0.5), Error);
}

TEST(WeightedQuantile, EqualsBruteForceCdf) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(1, 60);
  std::uniform_int_distribution<int> permille(1, 999);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(size(rng));
    std::vector<double> s(n), w(n);
    for (double& v : s) v = t % 3 == 0 ? std::round(u(rng) * 4) / 4 : u(rng);
    for (double& v : w) v = t % 5 == 0 ? std::round(u(rng) * 3) : u(rng) * 2;
    if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[0] = 1.0;
    const double level = permille(rng) / 1000.0;
    EXPECT_EQ(weighted_quantile(s, w, level).value,
              oracle::weighted_cdf_quantile(s, w, level))
        << "instance " << t;
  }
}

// Equality holds wherever the rank ceil((n+1) level) is at most n; beyond
// that the unit mass at +infinity is what the level needs.
TEST(WeightedQuantile, UniformWeightsReduceToConformalQuantile) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(1, 200);
  std::uniform_int_distribution<int> permille(1, 999);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int compared = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> s(static_cast<std::size_t>(size(rng)));
    for (double& v : s) v = u(rng);
    const double level = permille(rng) / 1000.0;
    const std::vector<double> w(s.size(), 1.0);
    const Threshold wq = weighted_quantile(s, w, level);
    if (oracle::raw_rank(s.size(), level) > s.size()) {
      // The clamped rank of the plain quantile vs the test-point slot.
      EXPECT_TRUE(wq.is_unbounded());
      continue;
    }
    EXPECT_EQ(wq.value, conformal_quantile(s, level).value) << "instance " << t;
    ++compared;
  }
  EXPECT_GT(compared, 900);
}

TEST(PredictionSet, Examples) {
  const auto p = pv({0.6, 0.3, 0.1});
  EXPECT_EQ(prediction_set(p, 0.5).classes, (std::vector<int>{0}));
  EXPECT_EQ(prediction_set(p, 0.8).classes, (std::vector<int>{0, 1}));
  EXPECT_TRUE(prediction_set(p, 0.2).empty());
  // Strict: a score equal to the threshold is excluded.
  EXPECT_TRUE(prediction_set(pv({0.5, 0.5}), 0.5).empty());
  EXPECT_EQ(prediction_set(p, kInf).size(), 3u);
}

TEST(PredictionSet, MonotoneInThreshold) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> z(6);
    for (double& v : z) v = n(rng);
    const auto p = softmax(z);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const auto small = prediction_set(p, a);
    const auto large = prediction_set(p, b);
    for (int c : small.classes) EXPECT_TRUE(large.contains(c));
  }
}

TEST(PredictionSet, CoverageOnExchangeableData) {
  // i.i.d. uniform scores: P[s < q] averaged over calibration draws is
  // k / (n + 1) with k = ceil(101 * 0.9) = 91.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double alpha = 0.1;
  double covered = 0.0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> cal(100);
    for (double& v : cal) v = u(rng);
    const double q = conformal_quantile(cal, 1 - alpha).value;
    int hit = 0;
    for (int i = 0; i < 200; ++i) hit += u(rng) < q;
    covered += hit / 200.0;
  }
  EXPECT_NEAR(covered / trials, 91.0 / 101.0, 0.005);
  EXPECT_GE(covered / trials, 1 - alpha - 0.005);
}

TEST(Argmax, LowestIndexOnTies) {
  EXPECT_EQ(argmax(pv({0.5, 0.5})), 0);
  EXPECT_EQ(argmax(pv({0.2, 0.4, 0.4})), 1);
}

TEST(CoverageLevel, Validates) {
  EXPECT_DOUBLE_EQ(CoverageLevel(0.1).target(), 0.9);
  EXPECT_THROW(CoverageLevel(0.0), Error);
  EXPECT_THROW(CoverageLevel(1.0), Error);
}

}  // namespace
}  // namespace cui
