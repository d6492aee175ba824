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

#include "cui/adaptation.h"

#include <algorithm>
#include <string>

#include "cui/error.h"

namespace cui {
namespace {

ProbabilityVector row_probabilities(const Matrix& probs, Eigen::Index r) {
  return ProbabilityVector::from(
      std::vector<double>(probs.row(r).data(), probs.row(r).data() + probs.cols()));
}

}  // namespace

AdaptationWeights gamma_weights(std::span<const std::size_t> set_sizes, double delta) {
  if (set_sizes.empty()) fail(ErrorCode::kInvalidInput, "gamma needs a nonempty batch");
  if (!(delta > 0.0)) fail(ErrorCode::kInvalidInput, "delta must be positive");
  AdaptationWeights w;
  w.delta = delta;
  w.gammas.assign(set_sizes.size(), 0.0);
  std::size_t m = 0;
  for (std::size_t s : set_sizes) m = std::max(m, s);
  if (m == 0) return w;
  const double md = static_cast<double>(m);
  for (std::size_t i = 0; i < set_sizes.size(); ++i) {
    const std::size_t s = set_sizes[i];
    if (s == 0) continue;
    w.gammas[i] = (md - static_cast<double>(s) + delta) / (md - 1.0 + delta);
  }
  return w;
}

std::string_view to_string(GammaMode m) {
  return m == GammaMode::kUniform ? "uniform" : "set_size";
}

GammaMode parse_gamma_mode(std::string_view s) {
  if (s == "set_size") return GammaMode::kSetSize;
  if (s == "uniform") return GammaMode::kUniform;
  fail(ErrorCode::kInvalidConfig, "unknown gamma mode '" + std::string(s) + "'");
}

void AdaptConfig::validate() const {
  if (!(delta > 0.0)) fail(ErrorCode::kInvalidConfig, "adaptation.delta must be > 0");
  if (!(lr >= 0.0)) fail(ErrorCode::kInvalidConfig, "model.lr must be >= 0");
  if (!(teacher_temperature > 0.0)) {
    fail(ErrorCode::kInvalidConfig, "model.teacher_temperature must be > 0");
  }
  if (steps_per_batch < 1) {
    fail(ErrorCode::kInvalidConfig, "model.steps_per_batch must be >= 1");
  }
}

CalibrationState::CalibrationState(const CalibrationSet& calibration,
                                   const ModelParams& source, const ShiftConfig& shift)
    : calibration_(calibration),
      source_logits_(forward_batch(source, calibration.features())),
      shift_rows_(shift.calib_subsample == 0
                      ? calibration.size()
                      : std::min(shift.calib_subsample, calibration.size())),
      estimator_(shift.aggregation, shift.centering) {
  if (calibration.size() == 0) {
    fail(ErrorCode::kEmptyCalibration, "calibration set is empty");
  }
}

void CalibrationState::refresh(const ModelParams& current) {
  if (valid_ && scores_.model_version == current.version()) return;
  const Matrix logits = forward_batch(current, calibration_.features());
  scores_ = scores_from_logits(logits, calibration_.labels(), current.version());
  estimator_.set_calibration(joints_from_logits(source_logits_, logits, shift_rows_),
                             current.version());
  valid_ = true;
  ++refreshes_;
}

CalibrationScores scores_from_logits(const Matrix& logits, std::span<const int> labels,
                                     std::uint64_t model_version) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows()) {
    fail(ErrorCode::kInvalidInput, "label count does not match logits");
  }
  const Matrix probs = softmax_rows(logits);
  CalibrationScores out;
  out.model_version = model_version;
  out.scores.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.scores[i] = nonconformity_score(
        row_probabilities(probs, static_cast<Eigen::Index>(i)), labels[i]);
  }
  return out;
}

std::vector<JointRepresentation> joints_from_logits(const Matrix& source_logits,
                                                    const Matrix& current_logits,
                                                    std::size_t rows) {
  if (source_logits.rows() != current_logits.rows() ||
      source_logits.cols() != current_logits.cols() ||
      static_cast<Eigen::Index>(rows) > source_logits.rows()) {
    fail(ErrorCode::kInvalidInput, "source and current logits disagree in shape");
  }
  std::vector<JointRepresentation> out;
  out.reserve(rows);
  const auto k = static_cast<std::size_t>(source_logits.cols());
  for (std::size_t i = 0; i < rows; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.push_back(joint_representation(
        std::span<const double>(source_logits.row(r).data(), k),
        std::span<const double>(current_logits.row(r).data(), k)));
  }
  return out;
}

StepOutcome evaluate_batch(Matrix source_logits, Matrix current_logits,
                           const CalibrationScores& scores,
                           const ShiftEstimator& estimator,
                           std::span<const PredictorConfig> predictors) {
  if (predictors.empty()) {
    fail(ErrorCode::kInvalidConfig, "at least one predictor is required");
  }
  const auto n = static_cast<std::size_t>(current_logits.rows());
  if (n == 0) fail(ErrorCode::kEmptyInput, "empty batch");

  StepOutcome out;
  out.batch_size = n;
  const Matrix probs = softmax_rows(current_logits);
  std::vector<ProbabilityVector> p;
  p.reserve(n);
  std::vector<double> batch_scores(n);
  out.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.push_back(row_probabilities(probs, static_cast<Eigen::Index>(i)));
    out.points[i] = argmax(p.back());
    batch_scores[i] = 1.0 - p.back()[static_cast<std::size_t>(out.points[i])];
  }

  out.shift = estimator.estimate(joints_from_logits(source_logits, current_logits, n));

  out.predictors.reserve(predictors.size());
  for (const PredictorConfig& cfg : predictors) {
    PredictorOutcome po;
    po.config = cfg;
    po.threshold = method_threshold(cfg, scores, out.shift, batch_scores);
    po.sets.reserve(n);
    for (const auto& pi : p) po.sets.push_back(prediction_set(pi, po.threshold.value));
    out.predictors.push_back(std::move(po));
  }
  out.source_logits = std::move(source_logits);
  out.current_logits = std::move(current_logits);
  return out;
}

StepOutcome ctta_step_multi(ModelPair& pair, const TestBatch& batch,
                            CalibrationState& calibration,
                            std::span<const PredictorConfig> predictors,
                            const AdaptConfig& adapt) {
  const ModelParams& current = pair.current(adapt.current);
  // Everything emitted uses the model state entering this batch.
  calibration.refresh(current);
  StepOutcome out = evaluate_batch(forward_batch(pair.source(), batch.features),
                                   forward_batch(current, batch.features),
                                   calibration.scores(), calibration.estimator(),
                                   predictors);
  const std::size_t n = out.batch_size;

  if (!adapt.enabled) return out;

  if (adapt.gamma_mode == GammaMode::kUniform) {
    out.gammas.assign(n, 1.0);
  } else {
    std::vector<std::size_t> sizes(n);
    const auto& sets = out.predictors.front().sets;
    for (std::size_t i = 0; i < n; ++i) sizes[i] = sets[i].size();
    out.gammas = gamma_weights(sizes, adapt.delta).gammas;
  }
  for (int step = 0; step < adapt.steps_per_batch; ++step) {
    LossAndGrad lg = weighted_ce_loss_and_grad(pair, batch.features, out.gammas,
                                               adapt.teacher_temperature);
    if (step == 0) out.loss = lg.loss;
    sgd_step(pair.mutable_student(), lg.grad, adapt.lr);
    pair.ema_update();
  }
  out.adapted = true;
  return out;
}

BatchOutcome ctta_step(ModelPair& pair, const TestBatch& batch,
                       CalibrationState& calibration, const PredictorConfig& predictor,
                       const AdaptConfig& adapt) {
  StepOutcome s = ctta_step_multi(pair, batch, calibration,
                                  std::span<const PredictorConfig>(&predictor, 1), adapt);
  BatchOutcome b;
  b.points = std::move(s.points);
  b.sets = std::move(s.predictors.front().sets);
  b.threshold = s.predictors.front().threshold;
  b.gammas = std::move(s.gammas);
  b.shift = s.shift;
  b.loss = s.loss;
  return b;
}

}  // namespace cui
