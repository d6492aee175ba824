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

#include "cui/harness/experiment.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <unistd.h>

#include "cui/harness/config.h"
#include "cui/stream.h"

namespace cui::harness {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("cui_exp_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Drops the given zero-based columns from every line.
std::string drop_columns(const std::string& csv, std::vector<std::size_t> cols) {
  std::stringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string field;
    std::size_t i = 0;
    bool first = true;
    while (std::getline(ls, field, ',')) {
      if (std::find(cols.begin(), cols.end(), i++) != cols.end()) continue;
      if (!first) out += ',';
      out += field;
      first = false;
    }
    out += '\n';
  }
  return out;
}

ExperimentConfig small(const std::vector<std::string>& extra = {}) {
  std::vector<std::string> o = {
      "stream.domains=[{\"kind\":\"rotate\",\"severity\":3,\"samples\":300},"
      "{\"kind\":\"shift_means\",\"severity\":5,\"samples\":300}]",
      "sweep.methods=[\"THR\",\"NexCP\",\"QTC\",\"CUI\"]", "sweep.alphas=[0.1,0.3]",
      "sweep.betas=[2]"};
  o.insert(o.end(), extra.begin(), extra.end());
  return parse_config("", o);
}

TEST(Simulate, ByteIdenticalAcrossRunsAndJobCounts) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ExperimentConfig cfg = small({"seeds=[0,1]", "adaptation.enabled=true"});
  cfg.output.dir = a.string();
  cfg.jobs = 1;
  run_simulate(cfg);
  cfg.output.dir = b.string();
  cfg.jobs = 2;
  run_simulate(cfg);
  for (const char* f : {"batches_seed0.csv", "batches_seed1.csv", "summary_seed0.csv",
                        "summary_seed1.csv"}) {
    const std::string ta = slurp(a / f);
    EXPECT_FALSE(ta.empty()) << f;
    EXPECT_EQ(ta, slurp(b / f)) << f;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Simulate, CuiWithBetaZeroMatchesThr) {
  const fs::path a = scratch("b0_cui"), b = scratch("b0_thr");
  for (bool adapt : {false, true}) {
    const std::string en = adapt ? "adaptation.enabled=true" : "adaptation.enabled=false";
    ExperimentConfig cui = parse_config("", {"predictor.method=CUI", "predictor.beta=0", en});
    ExperimentConfig thr = parse_config("", {"predictor.method=THR", "predictor.beta=0", en});
    cui.output.dir = a.string();
    thr.output.dir = b.string();
    run_simulate(cui);
    run_simulate(thr);
    // method (3) and config_hash (18) name the run; everything else must agree.
    EXPECT_EQ(drop_columns(slurp(a / "batches_seed0.csv"), {3, 18}),
              drop_columns(slurp(b / "batches_seed0.csv"), {3, 18}));
    EXPECT_EQ(drop_columns(slurp(a / "summary_seed0.csv"), {1}),
              drop_columns(slurp(b / "summary_seed0.csv"), {1}));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Replay, ReproducesSimulateWithoutAdaptation) {
  const fs::path dir = scratch("replay");
  ExperimentConfig cfg = small({"seeds=[3]", "output.export_logits=true"});
  cfg.output.dir = dir.string();
  const auto sim = run_simulate(cfg);
  const auto rep = run_replay(cfg, dir / "logits_seed3.csv",
                              dir / "calibration_logits_seed3.csv");
  ASSERT_EQ(sim.size(), 1u);
  ASSERT_EQ(rep.size(), 1u);
  ASSERT_EQ(sim[0].summary.size(), rep[0].summary.size());
  for (std::size_t i = 0; i < sim[0].summary.size(); ++i) {
    const auto& s = sim[0].summary[i];
    const auto& r = rep[0].summary[i];
    EXPECT_EQ(s.method, r.method);
    EXPECT_EQ(s.err, r.err);
    EXPECT_EQ(s.cov, r.cov);
    EXPECT_EQ(s.ine, r.ine);
  }
  EXPECT_EQ(slurp(dir / "summary_seed3.csv"), slurp(dir / "summary_replay_seed3.csv"));
  EXPECT_EQ(slurp(dir / "batches_seed3.csv"), slurp(dir / "batches_replay_seed3.csv"));
  fs::remove_all(dir);
}

TEST(Replay, CuiNeedsCurrentModelColumns) {
  LogitsTable t;
  t.num_classes = 2;
  t.rows.push_back({"a", 0, 1, {0.1, 0.2}, {}});
  ExperimentConfig cfg = parse_config("", {"predictor.method=CUI"});
  try {
    replay(cfg, t, t);
    FAIL();
  } catch (const ExitError& e) {
    EXPECT_EQ(e.exit_code(), kExitMissingCurrentLogits);
  }
  cfg = parse_config("", {"predictor.method=THR"});
  const auto r = replay(cfg, t, t);
  EXPECT_EQ(r.summary.back().samples, 1u);
}

TEST(Calibrate, SingleRowFile) {
  LogitsTable t;
  t.num_classes = 2;
  t.rows.push_back({"a", 0, 0, {0.0, 0.0}, {}});
  EXPECT_DOUBLE_EQ(calibrate(t, 0.1).value, 0.5);
  t.has_current = true;
  t.rows[0].crt = {std::log(3.0), 0.0};
  EXPECT_NEAR(calibrate(t, 0.1).value, 0.25, 1e-15);
}

TEST(Simulate, PretrainFloorFailure) {
  ExperimentConfig cfg = small({"source.epochs=0", "source.accuracy_floor=0.99"});
  try {
    simulate_seed(cfg, 0);
    FAIL();
  } catch (const ExitError& e) {
    EXPECT_EQ(e.exit_code(), kExitPretrainFloor);
  }
}

TEST(Simulate, SnapshotReuseGivesTheSameRun) {
  const fs::path dir = scratch("snap");
  ExperimentConfig cfg = small({"output.save_source_snapshot=true"});
  cfg.output.dir = dir.string();
  const auto first = run_simulate(cfg);
  ASSERT_TRUE(fs::exists(dir / "source_seed0.cuim"));
  ExperimentConfig again = small({"source.epochs=0"});
  again.source.snapshot = (dir / "source_seed0.cuim").string();
  again.output.dir = (dir / "b").string();
  const auto second = run_simulate(again);
  EXPECT_EQ(first[0].source_accuracy, second[0].source_accuracy);
  EXPECT_EQ(first[0].summary.back().cov, second[0].summary.back().cov);
  fs::remove_all(dir);
}

TEST(Simulate, ResultShape) {
  const ExperimentConfig cfg = small();
  const SeedResult r = simulate_seed(cfg, 0);
  const std::size_t preds = cfg.predictors().size();
  EXPECT_EQ(r.predictors.size(), preds);
  EXPECT_EQ(r.reports.size(), preds);
  // 300 samples in batches of 64: 5 batches per domain.
  EXPECT_EQ(r.rows.size(), 10 * preds);
  EXPECT_EQ(r.summary.size(), 3 * preds);
  EXPECT_GT(r.source_accuracy, cfg.source.accuracy_floor);
  for (const auto& row : r.rows) EXPECT_LE(row.batch_size, 64u);
}

// Source-model accuracy on corrupted data, averaged over seeds, does not
// rise with severity (one inversion of at most a point allowed per kind).
TEST(Stream, AccuracyNonincreasingInSeverity) {
  ExperimentConfig cfg = default_config();
  for (CorruptionKind kind :
       {CorruptionKind::kRotate, CorruptionKind::kGaussianNoise, CorruptionKind::kShiftMeans,
        CorruptionKind::kFeatureScale, CorruptionKind::kMeanCollapse}) {
    std::vector<double> acc(kMaxSeverity + 1, 0.0);
    const int seeds = 10;
    for (int seed = 0; seed < seeds; ++seed) {
      const SourceTask task(cfg.task, static_cast<std::uint64_t>(seed));
      const auto splits = make_source(task, cfg.source.n_train, cfg.source.n_calib, 10,
                                      cfg.source.construction, seed);
      const ModelParams src =
          pretrain_source(cfg, splits.train.features, splits.train.labels, seed);
      for (int s = 0; s <= kMaxSeverity; ++s) {
        StreamSchedule sched;
        sched.batch_size = 500;
        sched.domains = {{kind, s, 1000}};
        Stream stream(task, sched, seed);
        while (auto item = stream.next_batch()) {
          acc[s] += accuracy(src, item->batch.features, item->labels.labels) *
                    static_cast<double>(item->labels.labels.size()) / 1000.0 / seeds;
        }
      }
    }
    int inversions = 0;
    for (int s = 1; s <= kMaxSeverity; ++s) {
      if (acc[s] > acc[s - 1]) {
        ++inversions;
        EXPECT_LE(acc[s] - acc[s - 1], 0.01) << to_string(kind) << " severity " << s;
      }
    }
    EXPECT_LE(inversions, 1) << to_string(kind);
  }
}

}  // namespace
}  // namespace cui::harness
