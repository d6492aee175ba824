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

#include "cui/shift.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cui/conformal.h"
#include "cui/error.h"

namespace cui {
namespace {

double neg_entropy_of(std::span<const double> p) {
  double acc = 0.0;
  for (double v : p) {
    if (v > 0.0) acc += v * std::log(v);
  }
  return acc;
}

// JS(p||q) = (sum p ln p + sum q ln q)/2 - sum m ln m. With the entropies
// cached, one pair costs a single log per nonzero entry of m.
double js_from_entropies(const JointRepresentation& p,
                         const JointRepresentation& q) {
  const auto a = p.values();
  const auto b = q.values();
  double mixture = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double m = 0.5 * (a[i] + b[i]);
    if (m > 0.0) mixture += m * std::log(m);
  }
  const double js = 0.5 * (p.neg_entropy() + q.neg_entropy()) - mixture;
  return std::clamp(js, 0.0, std::numbers::ln2);
}

}  // namespace

JointRepresentation::JointRepresentation(std::vector<double> probs)
    : probs_(std::move(probs)), neg_entropy_(neg_entropy_of(probs_)) {}

JointRepresentation JointRepresentation::from(std::vector<double> probs) {
  if (probs.size() < 4 || probs.size() % 2 != 0) {
    fail(ErrorCode::kInvalidInput,
         "joint representation needs an even length >= 4");
  }
  double sum = 0.0;
  for (double v : probs) {
    if (!(v >= 0.0 && v <= 1.0)) {
      fail(ErrorCode::kInvalidInput, "joint entry outside [0,1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidInput, "joint representation does not sum to 1");
  }
  return JointRepresentation(std::move(probs));
}

std::string_view to_string(Aggregation a) {
  return a == Aggregation::kMean ? "mean" : "sum";
}

std::string_view to_string(Centering c) {
  switch (c) {
    case Centering::kOff:
      return "off";
    case Centering::kCalibration:
      return "calibration";
    case Centering::kSymmetric:
      return "symmetric";
  }
  return "off";
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "mean") return Aggregation::kMean;
  if (s == "sum") return Aggregation::kSum;
  fail(ErrorCode::kInvalidConfig, "unknown aggregation '" + std::string(s) + "'");
}

Centering parse_centering(std::string_view s) {
  if (s == "off") return Centering::kOff;
  if (s == "calibration") return Centering::kCalibration;
  if (s == "symmetric") return Centering::kSymmetric;
  fail(ErrorCode::kInvalidConfig, "unknown centering '" + std::string(s) + "'");
}

JointRepresentation joint_representation(std::span<const double> src_logits,
                                         std::span<const double> crt_logits) {
  if (src_logits.size() != crt_logits.size()) {
    fail(ErrorCode::kInvalidInput, "source/current logit lengths differ");
  }
  std::vector<double> concat;
  concat.reserve(2 * src_logits.size());
  concat.insert(concat.end(), src_logits.begin(), src_logits.end());
  concat.insert(concat.end(), crt_logits.begin(), crt_logits.end());
  const ProbabilityVector p = softmax(concat);
  return JointRepresentation(std::vector<double>(p.values().begin(), p.values().end()));
}

double js_divergence(const JointRepresentation& p, const JointRepresentation& q) {
  if (p.size() != q.size()) {
    fail(ErrorCode::kInvalidInput, "joint representations differ in length");
  }
  return js_from_entropies(p, q);
}

double mean_self_divergence(std::span<const JointRepresentation> joints) {
  const std::size_t n = joints.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      total += js_from_entropies(joints[i], joints[j]);
    }
  }
  return total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

double pairwise_divergence_sum(std::span<const JointRepresentation> batch,
                               std::span<const JointRepresentation> calib) {
  double total = 0.0;
  for (const auto& b : batch) {
    if (!calib.empty() && b.size() != calib.front().size()) {
      fail(ErrorCode::kInvalidInput, "joint representations differ in length");
    }
    double row = 0.0;
    for (const auto& c : calib) row += js_from_entropies(b, c);
    total += row;
  }
  return total;
}

namespace {

ShiftEstimate finish_estimate(double pair_sum, std::size_t n_calib,
                              std::size_t n_batch, double calib_self,
                              std::span<const JointRepresentation> batch_joints,
                              Aggregation aggregation, Centering centering) {
  const double pairs = static_cast<double>(n_calib) * static_cast<double>(n_batch);
  const double mean_rho = pair_sum / pairs;

  double mean_baseline = 0.0;
  switch (centering) {
    case Centering::kOff:
      break;
    case Centering::kCalibration:
      mean_baseline = calib_self;
      break;
    case Centering::kSymmetric:
      mean_baseline = 0.5 * (calib_self + mean_self_divergence(batch_joints));
      break;
  }

  ShiftEstimate est;
  est.aggregation = aggregation;
  const double scale = aggregation == Aggregation::kMean ? 1.0 : pairs;
  est.rho = aggregation == Aggregation::kMean ? mean_rho : pair_sum;
  est.rho_baseline = mean_baseline * scale;
  est.rho_centered = centering == Centering::kOff
                         ? est.rho
                         : std::max(0.0, est.rho - est.rho_baseline);
  return est;
}

}  // namespace

ShiftEstimate shift_estimate(std::span<const JointRepresentation> calib_joints,
                             std::span<const JointRepresentation> batch_joints,
                             Aggregation aggregation, Centering centering) {
  if (calib_joints.empty() || batch_joints.empty()) {
    fail(ErrorCode::kEmptyInput, "shift estimate needs calibration and batch samples");
  }
  const double pair_sum = pairwise_divergence_sum(batch_joints, calib_joints);
  const double calib_self =
      centering == Centering::kOff ? 0.0 : mean_self_divergence(calib_joints);
  return finish_estimate(pair_sum, calib_joints.size(), batch_joints.size(),
                         calib_self, batch_joints, aggregation, centering);
}

void ShiftEstimator::set_calibration(std::vector<JointRepresentation> calib_joints,
                                     std::uint64_t model_version) {
  if (calib_joints.empty()) {
    fail(ErrorCode::kEmptyInput, "shift estimator needs calibration samples");
  }
  calib_joints_ = std::move(calib_joints);
  calib_self_divergence_ =
      centering_ == Centering::kOff ? 0.0 : mean_self_divergence(calib_joints_);
  model_version_ = model_version;
  has_calibration_ = true;
}

ShiftEstimate ShiftEstimator::estimate(
    std::span<const JointRepresentation> batch_joints) const {
  if (!has_calibration_) {
    fail(ErrorCode::kEmptyInput, "shift estimator has no calibration joints");
  }
  if (batch_joints.empty()) {
    fail(ErrorCode::kEmptyInput, "shift estimate needs batch samples");
  }
  const double pair_sum = pairwise_divergence_sum(batch_joints, calib_joints_);
  return finish_estimate(pair_sum, calib_joints_.size(), batch_joints.size(),
                         calib_self_divergence_, batch_joints, aggregation_,
                         centering_);
}

}  // namespace cui
