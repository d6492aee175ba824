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

// Split conformal primitives for classification: softmax, the
// "one minus true-class probability" nonconformity score, finite-sample
// quantiles and thresholded prediction sets.

#ifndef CUI_CONFORMAL_H_
#define CUI_CONFORMAL_H_

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace cui {

// Relative slack used when comparing a cumulative mass against a quantile
// level, so that e.g. level 0.8 over 5 slots selects exactly the 4th slot
// regardless of how 0.8 rounds.
inline constexpr double kLevelSlack = 1e-12;

// A distribution over K >= 2 classes. Entries in [0,1], summing to 1 within
// 1e-9. Instances are only created through validating factories.
class ProbabilityVector {
 public:
  // Validates and wraps `probs`. Throws Error(kInvalidInput).
  static ProbabilityVector from(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> values() const { return probs_; }

 private:
  explicit ProbabilityVector(std::vector<double> probs)
      : probs_(std::move(probs)) {}
  friend ProbabilityVector softmax(std::span<const double> logits);

  std::vector<double> probs_;
};

// User coverage level: target coverage is 1 - alpha.
class CoverageLevel {
 public:
  explicit CoverageLevel(double alpha);
  double alpha() const { return alpha_; }
  double target() const { return 1.0 - alpha_; }

 private:
  double alpha_;
};

struct Threshold {
  // May be +infinity (weighted quantiles): every class is included.
  double value = 0.0;
  // Quantile level that produced the value.
  double level = 0.0;

  bool is_unbounded() const {
    return value == std::numeric_limits<double>::infinity();
  }
};

struct PredictionSet {
  std::vector<int> classes;  // ascending
  double threshold_used = 0.0;

  std::size_t size() const { return classes.size(); }
  bool empty() const { return classes.empty(); }
  bool contains(int y) const;
};

// Numerically stable softmax (max-subtracted). Requires K >= 2 finite logits.
ProbabilityVector softmax(std::span<const double> logits);

// 1 - p[y]. Throws kInvalidInput when y is out of range.
double nonconformity_score(const ProbabilityVector& p, int y);

// The ceil((n+1)*level)-th smallest score, index clamped to n.
// Throws kEmptyCalibration for empty input, kInvalidInput for level outside
// (0,1).
Threshold conformal_quantile(std::span<const double> scores, double level);

// Smallest score t with sum_{s_i <= t} w_i / (sum w + 1) >= level, where the
// extra unit mass sits at +infinity (the test point's own slot). Returns
// +infinity if no finite score reaches the level.
Threshold weighted_quantile(std::span<const double> scores,
                            std::span<const double> weights, double level);

// {y : 1 - p[y] < tau}.
PredictionSet prediction_set(const ProbabilityVector& p, double tau);

// Index of the largest probability, lowest index on ties.
int argmax(const ProbabilityVector& p);

}  // namespace cui

#endif  // CUI_CONFORMAL_H_
