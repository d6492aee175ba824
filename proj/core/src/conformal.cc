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
#include <numeric>
#include <string>

#include "cui/error.h"

namespace cui {
namespace {

constexpr double kSumTolerance = 1e-9;

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    fail(ErrorCode::kInvalidInput,
         "quantile level must lie in (0,1), got " + std::to_string(level));
  }
}

}  // namespace

ProbabilityVector ProbabilityVector::from(std::vector<double> probs) {
  if (probs.size() < 2) {
    fail(ErrorCode::kInvalidInput, "probability vector needs K >= 2 entries");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      fail(ErrorCode::kInvalidInput, "probability entry outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    fail(ErrorCode::kInvalidInput,
         "probabilities sum to " + std::to_string(sum) + ", not 1");
  }
  return ProbabilityVector(std::move(probs));
}

CoverageLevel::CoverageLevel(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(ErrorCode::kInvalidInput,
         "alpha must lie in (0,1), got " + std::to_string(alpha));
  }
}

bool PredictionSet::contains(int y) const {
  return std::binary_search(classes.begin(), classes.end(), y);
}

ProbabilityVector softmax(std::span<const double> logits) {
  if (logits.size() < 2) {
    fail(ErrorCode::kInvalidInput, "softmax needs K >= 2 logits");
  }
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double z : logits) {
    if (!std::isfinite(z)) {
      fail(ErrorCode::kInvalidInput, "softmax input is not finite");
    }
    max_logit = std::max(max_logit, z);
  }
  std::vector<double> probs(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max_logit);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return ProbabilityVector(std::move(probs));
}

double nonconformity_score(const ProbabilityVector& p, int y) {
  if (y < 0 || static_cast<std::size_t>(y) >= p.size()) {
    fail(ErrorCode::kInvalidInput,
         "class index " + std::to_string(y) + " out of range");
  }
  return 1.0 - p[static_cast<std::size_t>(y)];
}

Threshold conformal_quantile(std::span<const double> scores, double level) {
  if (scores.empty()) {
    fail(ErrorCode::kEmptyCalibration, "no calibration scores");
  }
  check_level(level);
  const double n = static_cast<double>(scores.size());
  const double slots = n + 1.0;
  auto k = static_cast<std::size_t>(
      std::ceil(slots * level - kLevelSlack * slots));
  k = std::clamp<std::size_t>(k, 1, scores.size());

  std::vector<double> sorted(scores.begin(), scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
  return Threshold{sorted[k - 1], level};
}

Threshold weighted_quantile(std::span<const double> scores,
                            std::span<const double> weights, double level) {
  if (scores.empty()) {
    fail(ErrorCode::kEmptyCalibration, "no calibration scores");
  }
  if (scores.size() != weights.size()) {
    fail(ErrorCode::kInvalidInput, "scores and weights differ in length");
  }
  check_level(level);
  double weight_sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      fail(ErrorCode::kInvalidInput, "weights must be finite and nonnegative");
    }
    weight_sum += w;
  }
  if (weight_sum <= 0.0) {
    fail(ErrorCode::kInvalidInput, "weights are all zero");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  const double total = weight_sum + 1.0;
  const double needed = level * total - kLevelSlack * total;
  double cumulative = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    // Mass at a tie group counts as a whole: the CDF is right-continuous.
    const double value = scores[order[i]];
    while (i < order.size() && scores[order[i]] == value) {
      cumulative += weights[order[i]];
      ++i;
    }
    if (cumulative >= needed) return Threshold{value, level};
  }
  return Threshold{std::numeric_limits<double>::infinity(), level};
}

PredictionSet prediction_set(const ProbabilityVector& p, double tau) {
  PredictionSet set;
  set.threshold_used = tau;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (1.0 - p[y] < tau) set.classes.push_back(static_cast<int>(y));
  }
  return set;
}

int argmax(const ProbabilityVector& p) {
  std::size_t best = 0;
  for (std::size_t y = 1; y < p.size(); ++y) {
    if (p[y] > p[best]) best = y;
  }
  return static_cast<int>(best);
}

}  // namespace cui
