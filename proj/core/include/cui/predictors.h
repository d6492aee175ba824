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

// Conformal predictors sharing one calling convention:
//   THR    plain split-conformal threshold on calibration scores.
//   NexCP  recency-weighted calibration quantile with a test-point slot.
//   QTC    coverage level re-estimated from unlabeled batch scores.
//   CUI    THR threshold shifted by beta times the centered shift estimate.

#ifndef CUI_PREDICTORS_H_
#define CUI_PREDICTORS_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "cui/conformal.h"
#include "cui/shift.h"

namespace cui {

enum class Method { kThr, kNexCp, kQtc, kCui };

// Direction of the CUI compensation. kCoverageIncreasing raises the
// threshold (larger sets); kLiteral subtracts as the original formula reads.
enum class CompensationSign { kCoverageIncreasing, kLiteral };

std::string_view to_string(Method m);
std::string_view to_string(CompensationSign s);
Method parse_method(std::string_view s);
CompensationSign parse_compensation_sign(std::string_view s);

inline constexpr double kQtcLevelMin = 0.001;
inline constexpr double kQtcLevelMax = 0.999;

struct PredictorConfig {
  Method method = Method::kCui;
  double alpha = 0.1;
  double beta = 1.0;
  CompensationSign compensation_sign = CompensationSign::kCoverageIncreasing;
  double nexcp_decay = 0.99;

  // Throws Error(kInvalidConfig) on out-of-range fields.
  void validate() const;
  CoverageLevel coverage() const { return CoverageLevel(alpha); }
  // Whether thresholds depend on the shift estimate.
  bool needs_shift() const { return method == Method::kCui; }
};

// Calibration nonconformity scores under one model version. The calibration
// samples themselves never change; only these scores are refreshed.
struct CalibrationScores {
  std::vector<double> scores;
  std::uint64_t model_version = 0;
};

Threshold thr_threshold(const CalibrationScores& cal, const CoverageLevel& alpha);

Threshold cui_threshold(const CalibrationScores& cal, const CoverageLevel& alpha,
                        const ShiftEstimate& shift, const PredictorConfig& cfg);

// Weights decay^(n-i) for i = 1..n, so the most recent calibration sample
// carries weight 1.
std::vector<double> nexcp_weights(std::size_t n, double decay);

Threshold nexcp_threshold(const CalibrationScores& cal, const CoverageLevel& alpha,
                          const PredictorConfig& cfg);

// min( P_cal[s < Q(batch, alpha)], 1 - P_batch[s < Q(cal, 1-alpha)] ), not
// clamped. `batch_scores` are label-free scores (1 - max probability).
double qtc_level(const CalibrationScores& cal, std::span<const double> batch_scores,
                 const CoverageLevel& alpha);

// Quantile of calibration scores at 1 - clamp(qtc_level, 0.001, 0.999).
Threshold qtc_threshold(const CalibrationScores& cal,
                        std::span<const double> batch_scores,
                        const CoverageLevel& alpha);

// Dispatches on cfg.method. `shift` is only read for CUI and
// `batch_scores` only for QTC.
Threshold method_threshold(const PredictorConfig& cfg, const CalibrationScores& cal,
                           const ShiftEstimate& shift,
                           std::span<const double> batch_scores);

struct SetPrediction {
  int point = 0;
  PredictionSet set;
};

SetPrediction predict_with_sets(const ProbabilityVector& p, const Threshold& threshold);

}  // namespace cui

#endif  // CUI_PREDICTORS_H_
