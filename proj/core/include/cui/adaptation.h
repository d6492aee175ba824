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

// Set-size driven adaptation weights and the per-batch test-then-adapt step.

#ifndef CUI_ADAPTATION_H_
#define CUI_ADAPTATION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cui/conformal.h"
#include "cui/model.h"
#include "cui/predictors.h"
#include "cui/shift.h"
#include "cui/stream.h"

namespace cui {

inline constexpr double kDefaultDelta = 1e-9;

struct AdaptationWeights {
  std::vector<double> gammas;
  double delta = kDefaultDelta;
};

// With M the largest nonempty set size in the batch:
//   gamma = (M - s + delta) / (M - 1 + delta) for s > 0, gamma = 0 for s = 0.
// A batch of only empty sets gets all-zero weights. Throws kInvalidInput for
// an empty batch or delta <= 0.
AdaptationWeights gamma_weights(std::span<const std::size_t> set_sizes,
                                double delta = kDefaultDelta);

enum class GammaMode { kSetSize, kUniform };

std::string_view to_string(GammaMode m);
GammaMode parse_gamma_mode(std::string_view s);

struct ShiftConfig {
  Aggregation aggregation = Aggregation::kMean;
  Centering centering = Centering::kSymmetric;
  // Use only the first n calibration samples for the shift estimate (they
  // are i.i.d.); 0 keeps all of them.
  std::size_t calib_subsample = 0;
};

struct AdaptConfig {
  bool enabled = false;
  GammaMode gamma_mode = GammaMode::kSetSize;
  double delta = kDefaultDelta;
  double lr = 0.1;
  // Teacher targets are softmax(teacher_logits / T). T = 1 keeps the plain
  // soft targets.
  double teacher_temperature = 0.1;
  int steps_per_batch = 1;
  CurrentModel current = CurrentModel::kTeacher;

  // Throws kInvalidConfig.
  void validate() const;
};

// Calibration-side quantities that depend on the current model: scores and
// the shift estimator's joint representations. Source-model logits are
// computed once; everything else is recomputed when the current model's
// version changes.
class CalibrationState {
 public:
  CalibrationState(const CalibrationSet& calibration, const ModelParams& source,
                   const ShiftConfig& shift);

  // No-op when already computed for `current.version()`.
  void refresh(const ModelParams& current);

  const CalibrationScores& scores() const { return scores_; }
  const ShiftEstimator& estimator() const { return estimator_; }
  std::size_t refresh_count() const { return refreshes_; }

 private:
  const CalibrationSet& calibration_;
  Matrix source_logits_;
  std::size_t shift_rows_;
  CalibrationScores scores_;
  ShiftEstimator estimator_;
  bool valid_ = false;
  std::size_t refreshes_ = 0;
};

struct PredictorOutcome {
  PredictorConfig config;
  Threshold threshold;
  std::vector<PredictionSet> sets;
};

struct StepOutcome {
  std::size_t batch_size = 0;
  std::vector<int> points;
  ShiftEstimate shift;
  // One entry per requested predictor; the first one drives the weights.
  std::vector<PredictorOutcome> predictors;
  std::vector<double> gammas;  // empty when no update ran
  double loss = 0.0;
  bool adapted = false;
  Matrix source_logits;
  Matrix current_logits;
};

// Scores 1 - p[label] for each row of `logits`.
CalibrationScores scores_from_logits(const Matrix& logits, std::span<const int> labels,
                                     std::uint64_t model_version);

// Joint representations of the first `rows` rows.
std::vector<JointRepresentation> joints_from_logits(const Matrix& source_logits,
                                                    const Matrix& current_logits,
                                                    std::size_t rows);

// Prediction half of a step, from logits alone: shift estimate, thresholds,
// point and set predictions. Leaves gammas/loss empty.
StepOutcome evaluate_batch(Matrix source_logits, Matrix current_logits,
                           const CalibrationScores& scores,
                           const ShiftEstimator& estimator,
                           std::span<const PredictorConfig> predictors);

// One stream step for several predictors sharing a model trajectory:
// current-model probabilities, shift estimate, calibration scores under the
// current model, thresholds, point and set predictions, and only then (if
// enabled) the weighted student step(s) and teacher EMA update.
StepOutcome ctta_step_multi(ModelPair& pair, const TestBatch& batch,
                            CalibrationState& calibration,
                            std::span<const PredictorConfig> predictors,
                            const AdaptConfig& adapt);

struct BatchOutcome {
  std::vector<int> points;
  std::vector<PredictionSet> sets;
  std::vector<double> gammas;
  ShiftEstimate shift;
  Threshold threshold;
  double loss = 0.0;
};

BatchOutcome ctta_step(ModelPair& pair, const TestBatch& batch,
                       CalibrationState& calibration, const PredictorConfig& predictor,
                       const AdaptConfig& adapt);

}  // namespace cui

#endif  // CUI_ADAPTATION_H_
