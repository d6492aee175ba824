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

#include "cui/predictors.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "cui/error.h"

namespace cui {
namespace {

void require_calibration(const CalibrationScores& cal) {
  if (cal.scores.empty()) {
    fail(ErrorCode::kEmptyCalibration, "calibration scores are empty");
  }
}

double fraction_below(std::span<const double> values, double bound) {
  std::size_t below = 0;
  for (double v : values) {
    if (v < bound) ++below;
  }
  return static_cast<double>(below) / static_cast<double>(values.size());
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kThr:
      return "THR";
    case Method::kNexCp:
      return "NexCP";
    case Method::kQtc:
      return "QTC";
    case Method::kCui:
      return "CUI";
  }
  return "THR";
}

std::string_view to_string(CompensationSign s) {
  return s == CompensationSign::kLiteral ? "literal" : "coverage_increasing";
}

Method parse_method(std::string_view s) {
  if (s == "THR" || s == "thr") return Method::kThr;
  if (s == "NexCP" || s == "nexcp") return Method::kNexCp;
  if (s == "QTC" || s == "qtc") return Method::kQtc;
  if (s == "CUI" || s == "cui") return Method::kCui;
  fail(ErrorCode::kInvalidConfig, "unknown method '" + std::string(s) + "'");
}

CompensationSign parse_compensation_sign(std::string_view s) {
  if (s == "coverage_increasing") return CompensationSign::kCoverageIncreasing;
  if (s == "literal") return CompensationSign::kLiteral;
  fail(ErrorCode::kInvalidConfig,
       "unknown compensation sign '" + std::string(s) + "'");
}

void PredictorConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "predictor.alpha must lie in (0,1)");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    fail(ErrorCode::kInvalidConfig, "predictor.beta must be a finite value >= 0");
  }
  if (!(nexcp_decay > 0.0 && nexcp_decay <= 1.0)) {
    fail(ErrorCode::kInvalidConfig, "predictor.nexcp_decay must lie in (0,1]");
  }
}

Threshold thr_threshold(const CalibrationScores& cal, const CoverageLevel& alpha) {
  require_calibration(cal);
  return conformal_quantile(cal.scores, alpha.target());
}

Threshold cui_threshold(const CalibrationScores& cal, const CoverageLevel& alpha,
                        const ShiftEstimate& shift, const PredictorConfig& cfg) {
  Threshold t = thr_threshold(cal, alpha);
  const double delta = cfg.beta * shift.rho_centered;
  const double compensated =
      cfg.compensation_sign == CompensationSign::kLiteral ? t.value - delta
                                                          : t.value + delta;
  t.value = std::clamp(compensated, 0.0, 1.0);
  return t;
}

std::vector<double> nexcp_weights(std::size_t n, double decay) {
  std::vector<double> w(n);
  double current = 1.0;
  for (std::size_t i = n; i-- > 0;) {
    w[i] = current;
    current *= decay;
  }
  return w;
}

Threshold nexcp_threshold(const CalibrationScores& cal, const CoverageLevel& alpha,
                          const PredictorConfig& cfg) {
  require_calibration(cal);
  const std::vector<double> w = nexcp_weights(cal.scores.size(), cfg.nexcp_decay);
  return weighted_quantile(cal.scores, w, alpha.target());
}

double qtc_level(const CalibrationScores& cal, std::span<const double> batch_scores,
                 const CoverageLevel& alpha) {
  if (cal.scores.empty() || batch_scores.empty()) {
    fail(ErrorCode::kEmptyInput, "QTC needs calibration and batch scores");
  }
  const double batch_q = conformal_quantile(batch_scores, alpha.alpha()).value;
  const double cal_q = conformal_quantile(cal.scores, alpha.target()).value;
  const double from_cal = fraction_below(cal.scores, batch_q);
  const double from_batch = 1.0 - fraction_below(batch_scores, cal_q);
  return std::min(from_cal, from_batch);
}

Threshold qtc_threshold(const CalibrationScores& cal,
                        std::span<const double> batch_scores,
                        const CoverageLevel& alpha) {
  const double level =
      std::clamp(qtc_level(cal, batch_scores, alpha), kQtcLevelMin, kQtcLevelMax);
  return conformal_quantile(cal.scores, 1.0 - level);
}

Threshold method_threshold(const PredictorConfig& cfg, const CalibrationScores& cal,
                           const ShiftEstimate& shift,
                           std::span<const double> batch_scores) {
  const CoverageLevel alpha = cfg.coverage();
  switch (cfg.method) {
    case Method::kThr:
      return thr_threshold(cal, alpha);
    case Method::kNexCp:
      return nexcp_threshold(cal, alpha, cfg);
    case Method::kQtc:
      return qtc_threshold(cal, batch_scores, alpha);
    case Method::kCui:
      return cui_threshold(cal, alpha, shift, cfg);
  }
  return thr_threshold(cal, alpha);
}

SetPrediction predict_with_sets(const ProbabilityVector& p, const Threshold& threshold) {
  return SetPrediction{argmax(p), prediction_set(p, threshold.value)};
}

}  // namespace cui
