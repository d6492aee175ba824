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

// Experiment configuration. The canonical file format is JSON; every leaf can
// be overridden with a dotted path ("model.lr=0.2"). Unknown keys and
// out-of-range values are rejected before any computation starts.

#ifndef CUI_HARNESS_CONFIG_H_
#define CUI_HARNESS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "cui/adaptation.h"
#include "cui/predictors.h"
#include "cui/shift.h"
#include "cui/stream.h"

namespace cui::harness {

// Failure that maps onto a process exit code.
class ExitError : public std::runtime_error {
 public:
  ExitError(int exit_code, const std::string& what)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitPretrainFloor = 3;
inline constexpr int kExitMissingCurrentLogits = 4;
inline constexpr int kExitMalformedRow = 5;

struct SourceConfig {
  std::size_t n_train = 100;
  std::size_t n_calib = 50;
  std::size_t n_heldout = 2000;
  CalibrationConstruction construction = CalibrationConstruction::kPrivacyFirst;
  int epochs = 300;
  double lr = 0.5;
  double l2 = 0.01;
  // Heldout source accuracy the pretrained model must reach.
  double accuracy_floor = 0.5;
  // Optional snapshot to load instead of pretraining.
  std::string snapshot;
};

struct ModelConfig {
  int hidden_dim = 0;
  double ema_momentum = 0.9;
};

// Extra predictors evaluated on the same model trajectory as the primary
// one. beta only applies to CUI.
struct SweepConfig {
  std::vector<Method> methods;
  std::vector<double> alphas;
  std::vector<double> betas;
};

struct OutputConfig {
  // Empty: $CUI_OUTPUT_DIR, else "results".
  std::string dir;
  bool export_logits = false;
  bool save_source_snapshot = false;
  bool plots = false;
};

struct ExperimentConfig {
  SourceTaskConfig task;
  SourceConfig source;
  StreamSchedule schedule;
  PredictorConfig predictor;
  SweepConfig sweep;
  ShiftConfig shift;
  ModelConfig model;
  AdaptConfig adapt;
  std::vector<std::uint64_t> seeds = {0};
  int jobs = 1;
  OutputConfig output;

  // Primary predictor first, then the sweep products not equal to it.
  std::vector<PredictorConfig> predictors() const;
  std::filesystem::path output_dir() const;
};

// Defaults: headline severity-5 schedule, 4000 samples per domain, batch 64.
ExperimentConfig default_config();

// Parses JSON text on top of the defaults, then applies "a.b.c=value"
// overrides (values parsed as JSON when possible, else as strings). Throws
// ExitError(kExitInvalidConfig).
ExperimentConfig parse_config(const std::string& json_text,
                              const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

// Canonical JSON of the resolved configuration.
std::string to_json(const ExperimentConfig& cfg);

// 16 hex digits of a 64-bit FNV-1a over the canonical JSON, excluding seeds,
// jobs and output settings (they do not change per-seed results).
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace cui::harness

#endif  // CUI_HARNESS_CONFIG_H_
