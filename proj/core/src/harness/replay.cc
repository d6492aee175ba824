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

#include <algorithm>

#include <fmt/format.h>

#include "cui/error.h"
#include "cui/harness/experiment.h"
#include "recorder.h"

namespace cui::harness {
namespace {

// Rows [begin, end) of one logit column group as a matrix.
Matrix gather(const LogitsTable& t, std::size_t begin, std::size_t end, bool current) {
  Matrix m(static_cast<Eigen::Index>(end - begin), t.num_classes);
  for (std::size_t i = begin; i < end; ++i) {
    const auto& v = current && t.has_current ? t.rows[i].crt : t.rows[i].src;
    std::copy(v.begin(), v.end(), m.row(static_cast<Eigen::Index>(i - begin)).data());
  }
  return m;
}

}  // namespace

SeedResult replay(const ExperimentConfig& cfg, const LogitsTable& test,
                  const LogitsTable& calibration) {
  const std::vector<PredictorConfig> predictors = cfg.predictors();
  const bool wants_cui = std::any_of(predictors.begin(), predictors.end(),
                                     [](const auto& p) { return p.method == Method::kCui; });
  if (wants_cui && !(test.has_current && calibration.has_current)) {
    throw ExitError(kExitMissingCurrentLogits,
                    "CUI needs crt_ columns in both the logits and calibration files");
  }
  if (test.num_classes != calibration.num_classes) {
    throw ExitError(kExitMalformedRow,
                    fmt::format("class count differs: logits K={}, calibration K={}",
                                test.num_classes, calibration.num_classes));
  }
  if (calibration.rows.empty()) {
    throw ExitError(kExitMalformedRow, "calibration file has no rows");
  }

  // Without crt columns the source logits stand in for the current model.
  const Matrix cal_src = gather(calibration, 0, calibration.rows.size(), false);
  const Matrix cal_crt = gather(calibration, 0, calibration.rows.size(), true);
  std::vector<int> cal_labels;
  for (const auto& r : calibration.rows) cal_labels.push_back(r.label);
  const CalibrationScores scores = scores_from_logits(cal_crt, cal_labels, 0);
  const std::size_t shift_rows =
      cfg.shift.calib_subsample == 0
          ? cal_src.rows()
          : std::min<std::size_t>(cfg.shift.calib_subsample, cal_src.rows());
  ShiftEstimator estimator(cfg.shift.aggregation, cfg.shift.centering);
  estimator.set_calibration(joints_from_logits(cal_src, cal_crt, shift_rows), 0);

  const std::uint64_t seed = cfg.seeds.front();
  Recorder recorder(seed, predictors);
  const std::size_t batch_size = cfg.schedule.batch_size;
  std::size_t batch_index = 0;
  std::size_t begin = 0;
  while (begin < test.rows.size()) {
    const std::size_t domain = test.rows[begin].domain;
    std::size_t end = begin;
    while (end < test.rows.size() && end - begin < batch_size &&
           test.rows[end].domain == domain) {
      ++end;
    }
    std::vector<int> labels;
    for (std::size_t i = begin; i < end; ++i) labels.push_back(test.rows[i].label);
    const StepOutcome step = evaluate_batch(gather(test, begin, end, false),
                                            gather(test, begin, end, true), scores,
                                            estimator, predictors);
    recorder.record(step, batch_index++, domain, labels);
    begin = end;
  }
  if (batch_index == 0) throw ExitError(kExitMalformedRow, "logits file has no rows");
  return std::move(recorder).finish(0.0);
}

std::vector<SeedResult> run_replay(const ExperimentConfig& cfg,
                                   const std::filesystem::path& logits_path,
                                   const std::filesystem::path& calibration_path,
                                   bool write_files) {
  const LogitsTable test = read_logits(logits_path);
  const LogitsTable calibration = read_logits(calibration_path);
  std::vector<SeedResult> results;
  results.push_back(replay(cfg, test, calibration));
  if (write_files) {
    const auto& r = results.front();
    const auto dir = cfg.output_dir();
    write_batch_csv(dir / fmt::format("batches_replay_seed{}.csv", r.seed), r.rows,
                    config_hash(cfg));
    write_summary_csv(dir / fmt::format("summary_replay_seed{}.csv", r.seed), r.summary);
  }
  return results;
}

Threshold calibrate(const LogitsTable& calibration, double alpha) {
  if (calibration.rows.empty()) {
    throw ExitError(kExitMalformedRow, "calibration file has no rows");
  }
  const Matrix logits = gather(calibration, 0, calibration.rows.size(), true);
  std::vector<int> labels;
  for (const auto& r : calibration.rows) labels.push_back(r.label);
  return thr_threshold(scores_from_logits(logits, labels, 0), CoverageLevel(alpha));
}

}  // namespace cui::harness
