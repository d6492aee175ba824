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
#include <future>

#include <fmt/format.h>

#include "cui/error.h"
#include "cui/harness/experiment.h"
#include "cui/harness/plots.h"
#include "cui/seed.h"
#include "cui/stream.h"
#include "recorder.h"

namespace cui::harness {
namespace {

void append_logits(LogitsTable& table, const Matrix& src, const Matrix& crt,
                   std::span<const int> labels, std::size_t domain) {
  const auto k = static_cast<std::size_t>(src.cols());
  for (Eigen::Index i = 0; i < src.rows(); ++i) {
    LogitsRecord r;
    r.id = std::to_string(table.rows.size());
    r.domain = domain;
    r.label = labels[static_cast<std::size_t>(i)];
    r.src.assign(src.row(i).data(), src.row(i).data() + k);
    r.crt.assign(crt.row(i).data(), crt.row(i).data() + k);
    table.rows.push_back(std::move(r));
  }
}

std::filesystem::path seed_file(const ExperimentConfig& cfg, const char* stem,
                                std::uint64_t seed, const char* ext) {
  return cfg.output_dir() / fmt::format("{}_seed{}.{}", stem, seed, ext);
}

ModelShape shape_of(const ExperimentConfig& cfg) {
  return ModelShape{cfg.task.dim, cfg.model.hidden_dim, cfg.task.num_classes};
}

}  // namespace

ModelParams pretrain_source(const ExperimentConfig& cfg, const Matrix& features,
                            const std::vector<int>& labels, std::uint64_t seed) {
  ModelParams params = cfg.model.hidden_dim > 0
                           ? ModelParams::random(shape_of(cfg), derive_seed(seed, "model.init"))
                           : ModelParams(shape_of(cfg));
  for (int e = 0; e < cfg.source.epochs; ++e) {
    const LossAndGrad lg =
        cross_entropy_loss_and_grad(params, features, labels, cfg.source.l2);
    sgd_step(params, lg.grad, cfg.source.lr);
  }
  return params;
}

double accuracy(const ModelParams& params, const Matrix& features,
                const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  const Matrix logits = forward_batch(params, features);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    if (static_cast<int>(best) == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

SeedResult simulate_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  const SourceTask task(cfg.task, seed);
  const SourceSplits splits =
      make_source(task, cfg.source.n_train, cfg.source.n_calib, cfg.source.n_heldout,
                  cfg.source.construction, seed);

  ModelParams source = [&] {
    if (cfg.source.snapshot.empty()) {
      return pretrain_source(cfg, splits.train.features, splits.train.labels, seed);
    }
    ModelParams loaded = load_snapshot(cfg.source.snapshot);
    if (!(loaded.shape() == shape_of(cfg))) {
      throw ExitError(kExitInvalidConfig,
                      "snapshot " + cfg.source.snapshot + " does not match the task shape");
    }
    return loaded;
  }();
  const double acc = accuracy(source, splits.heldout.features, splits.heldout.labels);
  if (acc < cfg.source.accuracy_floor) {
    throw ExitError(kExitPretrainFloor,
                    fmt::format("seed {}: heldout source accuracy {:.4f} is below the "
                                "floor {:.4f}",
                                seed, acc, cfg.source.accuracy_floor));
  }
  if (cfg.output.save_source_snapshot) {
    std::filesystem::create_directories(cfg.output_dir());
    save_snapshot(source, seed_file(cfg, "source", seed, "cuim"));
  }

  ModelPair pair(std::move(source), cfg.model.ema_momentum);
  CalibrationState calibration(splits.calibration, pair.source(), cfg.shift);
  const std::vector<PredictorConfig> predictors = cfg.predictors();
  Recorder recorder(seed, predictors);

  LogitsTable logits;
  LogitsTable calibration_logits;
  if (cfg.output.export_logits) {
    logits.num_classes = calibration_logits.num_classes = cfg.task.num_classes;
    logits.has_current = calibration_logits.has_current = true;
    const Matrix cal_src = forward_batch(pair.source(), splits.calibration.features());
    const Matrix cal_crt =
        forward_batch(pair.current(cfg.adapt.current), splits.calibration.features());
    append_logits(calibration_logits, cal_src, cal_crt, splits.calibration.labels(), 0);
  }

  Stream stream(task, cfg.schedule, seed);
  while (auto item = stream.next_batch()) {
    const StepOutcome step =
        ctta_step_multi(pair, item->batch, calibration, predictors, cfg.adapt);
    recorder.record(step, item->batch.index, item->batch.domain, item->labels.labels);
    if (cfg.output.export_logits) {
      append_logits(logits, step.source_logits, step.current_logits,
                    item->labels.labels, item->batch.domain);
    }
  }
  SeedResult result = std::move(recorder).finish(acc);
  result.logits = std::move(logits);
  result.calibration_logits = std::move(calibration_logits);
  return result;
}

std::vector<SeedResult> run_simulate(const ExperimentConfig& cfg, bool write_files) {
  std::vector<SeedResult> results(cfg.seeds.size());
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, cfg.jobs));
  for (std::size_t begin = 0; begin < cfg.seeds.size(); begin += jobs) {
    const std::size_t end = std::min(cfg.seeds.size(), begin + jobs);
    std::vector<std::future<SeedResult>> wave;
    for (std::size_t i = begin; i < end; ++i) {
      wave.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                [&cfg, seed = cfg.seeds[i]] { return simulate_seed(cfg, seed); }));
    }
    for (std::size_t i = begin; i < end; ++i) results[i] = wave[i - begin].get();
  }
  if (!write_files) return results;

  const std::string hash = config_hash(cfg);
  for (const auto& r : results) {
    write_batch_csv(seed_file(cfg, "batches", r.seed, "csv"), r.rows, hash);
    write_summary_csv(seed_file(cfg, "summary", r.seed, "csv"), r.summary);
    if (cfg.output.export_logits) {
      write_logits(seed_file(cfg, "logits", r.seed, "csv"), r.logits);
      write_logits(seed_file(cfg, "calibration_logits", r.seed, "csv"),
                   r.calibration_logits);
    }
  }
  if (cfg.output.plots) write_plots(cfg.output_dir(), results);
  return results;
}

}  // namespace cui::harness
