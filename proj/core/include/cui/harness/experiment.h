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

// Experiment drivers: simulate (pretrain, then test-then-adapt over the
// synthetic stream), replay (thresholds and sets from file-borne logits) and
// calibrate (the plain calibration threshold of a logits file).

#ifndef CUI_HARNESS_EXPERIMENT_H_
#define CUI_HARNESS_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cui/harness/config.h"
#include "cui/harness/io.h"
#include "cui/metrics.h"
#include "cui/model.h"

namespace cui::harness {

struct SeedResult {
  std::uint64_t seed = 0;
  double source_accuracy = 0.0;  // heldout source accuracy after pretraining
  std::vector<PredictorConfig> predictors;
  std::vector<MetricsReport> reports;  // parallel to predictors
  std::vector<BatchRow> rows;          // batch-major, predictor-minor
  std::vector<SummaryRow> summary;
  // Filled when output.export_logits is set.
  LogitsTable logits;
  LogitsTable calibration_logits;
};

// Full-batch gradient descent on the train split from zero (linear) or
// seeded random (hidden layer) parameters.
ModelParams pretrain_source(const ExperimentConfig& cfg, const Matrix& features,
                            const std::vector<int>& labels, std::uint64_t seed);

double accuracy(const ModelParams& params, const Matrix& features,
                const std::vector<int>& labels);

// One seed, in memory. Throws ExitError(kExitPretrainFloor) when the source
// model misses the accuracy floor.
SeedResult simulate_seed(const ExperimentConfig& cfg, std::uint64_t seed);

// All seeds (cfg.jobs at a time). When `write_files` is set, writes
// batches_seed<S>.csv and summary_seed<S>.csv (plus logits, snapshots and
// plots when configured) into cfg.output_dir().
std::vector<SeedResult> run_simulate(const ExperimentConfig& cfg, bool write_files = true);

// Uses cfg.predictors(), cfg.schedule.batch_size, cfg.shift and the first
// seed (for the seed column). Throws ExitError(kExitMissingCurrentLogits)
// when a CUI predictor is requested and either file lacks crt columns.
SeedResult replay(const ExperimentConfig& cfg, const LogitsTable& test,
                  const LogitsTable& calibration);

std::vector<SeedResult> run_replay(const ExperimentConfig& cfg,
                                   const std::filesystem::path& logits_path,
                                   const std::filesystem::path& calibration_path,
                                   bool write_files = true);

// conformal_quantile of the calibration file's scores at 1 - alpha, using
// crt logits when present and src logits otherwise.
Threshold calibrate(const LogitsTable& calibration, double alpha);

}  // namespace cui::harness

#endif  // CUI_HARNESS_EXPERIMENT_H_
