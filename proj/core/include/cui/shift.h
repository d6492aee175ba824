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

// Domain-shift estimation from joint source/current-model representations.
//
// Each sample is represented by one softmax over the concatenated logits of
// the frozen source model and the current model (2K entries). The shift
// estimate aggregates Jensen-Shannon divergences between every (batch,
// calibration) pair of such representations. Natural log throughout, so a
// single divergence lies in [0, ln 2].

#ifndef CUI_SHIFT_H_
#define CUI_SHIFT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cui {

class JointRepresentation {
 public:
  // Validating factory; the entries must form a distribution of even length.
  static JointRepresentation from(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  std::size_t num_classes() const { return probs_.size() / 2; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> values() const { return probs_; }

  // sum_i p_i ln p_i with 0 ln 0 = 0; cached at construction.
  double neg_entropy() const { return neg_entropy_; }

 private:
  explicit JointRepresentation(std::vector<double> probs);
  friend JointRepresentation joint_representation(std::span<const double>,
                                                  std::span<const double>);

  std::vector<double> probs_;
  double neg_entropy_ = 0.0;
};

enum class Aggregation { kMean, kSum };

// How the in-distribution level of pairwise divergence is removed.
//   kOff:          rho_centered = rho.
//   kCalibration:  baseline = mean divergence over distinct calibration
//                  pairs.
//   kSymmetric:    baseline = average of the calibration self-divergence and
//                  the batch self-divergence, so rho - baseline is a
//                  two-sample discrepancy that stays nonnegative when the
//                  batch is merely less diverse than the calibration set.
enum class Centering { kOff, kCalibration, kSymmetric };

std::string_view to_string(Aggregation a);
std::string_view to_string(Centering c);
Aggregation parse_aggregation(std::string_view s);
Centering parse_centering(std::string_view s);

struct ShiftEstimate {
  double rho = 0.0;
  double rho_baseline = 0.0;
  double rho_centered = 0.0;
  Aggregation aggregation = Aggregation::kMean;
};

// softmax(concat(src_logits, crt_logits)). Throws kInvalidInput on length
// mismatch or non-finite logits.
JointRepresentation joint_representation(std::span<const double> src_logits,
                                         std::span<const double> crt_logits);

// JS(p||q) = KL(p||m)/2 + KL(q||m)/2 with m = (p+q)/2. Throws kInvalidInput
// on length mismatch.
double js_divergence(const JointRepresentation& p, const JointRepresentation& q);

// Mean divergence over the n(n-1)/2 distinct pairs; 0 when n < 2.
double mean_self_divergence(std::span<const JointRepresentation> joints);

// Sum of divergences over the full |batch| x |calib| grid, accumulated in a
// fixed (batch-major) order.
double pairwise_divergence_sum(std::span<const JointRepresentation> batch,
                               std::span<const JointRepresentation> calib);

// Full estimate. For sum aggregation the baseline is rescaled by |C||B| so
// that centering removes the same in-distribution level in both modes.
// Throws kEmptyInput when either sequence is empty.
ShiftEstimate shift_estimate(std::span<const JointRepresentation> calib_joints,
                             std::span<const JointRepresentation> batch_joints,
                             Aggregation aggregation, Centering centering);

// Stateful estimator that reuses the calibration-side work (joint
// representations and their self-divergence) until the current model
// changes. Calibration source logits never change; current-model logits are
// refreshed by the caller whenever the model version advances.
class ShiftEstimator {
 public:
  ShiftEstimator(Aggregation aggregation, Centering centering)
      : aggregation_(aggregation), centering_(centering) {}

  // Installs calibration joints computed under `model_version`. The
  // calibration self-divergence is computed here, once per refresh.
  void set_calibration(std::vector<JointRepresentation> calib_joints,
                       std::uint64_t model_version);

  bool has_calibration_for(std::uint64_t model_version) const {
    return has_calibration_ && model_version_ == model_version;
  }

  ShiftEstimate estimate(std::span<const JointRepresentation> batch_joints) const;

  Aggregation aggregation() const { return aggregation_; }
  Centering centering() const { return centering_; }
  std::span<const JointRepresentation> calibration() const {
    return calib_joints_;
  }

 private:
  Aggregation aggregation_;
  Centering centering_;
  std::vector<JointRepresentation> calib_joints_;
  double calib_self_divergence_ = 0.0;
  std::uint64_t model_version_ = 0;
  bool has_calibration_ = false;
};

}  // namespace cui

#endif  // CUI_SHIFT_H_
