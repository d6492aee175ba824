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

#include "cui/harness/config.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace cui::harness {
namespace {

int exit_code_of(const std::string& json, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(json, overrides);
  } catch (const ExitError& e) {
    return e.exit_code();
  }
  return 0;
}

TEST(Config, Defaults) {
  const ExperimentConfig c = default_config();
  EXPECT_EQ(c.task.num_classes, 10);
  EXPECT_EQ(c.task.dim, 16);
  EXPECT_EQ(c.source.n_calib, 50u);
  ASSERT_EQ(c.schedule.domains.size(), 5u);
  EXPECT_EQ(c.schedule.domains[0].kind, CorruptionKind::kRotate);
  EXPECT_EQ(c.schedule.domains[4].kind, CorruptionKind::kMeanCollapse);
  for (const auto& d : c.schedule.domains) {
    EXPECT_EQ(d.severity, 5);
    EXPECT_EQ(d.samples, 4000u);
  }
  EXPECT_EQ(c.schedule.batch_size, 64u);
  EXPECT_EQ(c.shift.aggregation, Aggregation::kMean);
  EXPECT_EQ(c.predictor.compensation_sign, CompensationSign::kCoverageIncreasing);
  EXPECT_FALSE(c.adapt.enabled);
  EXPECT_EQ(c.seeds, std::vector<std::uint64_t>{0});
}

TEST(Config, EmptyTextAndEmptyObjectAreDefaults) {
  EXPECT_EQ(to_json(parse_config("")), to_json(default_config()));
  EXPECT_EQ(to_json(parse_config("{}")), to_json(default_config()));
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = parse_config(R"({"predictor": {"method": "QTC", "alpha": 0.2},
                                        "model": {"hidden_dim": 8, "current": "student"},
                                        "seeds": [3, 4]})");
  EXPECT_EQ(c.predictor.method, Method::kQtc);
  EXPECT_EQ(c.model.hidden_dim, 8);
  EXPECT_EQ(c.adapt.current, CurrentModel::kStudent);
  EXPECT_EQ(to_json(parse_config(to_json(c))), to_json(c));
}

TEST(Config, Overrides) {
  const ExperimentConfig c = parse_config(
      "", {"model.lr=0.25", "predictor.method=NexCP", "stream.domains[1].severity=2",
           "seeds=[7,8,9]", "adaptation.enabled=true", "sweep.alphas=[0.1,0.3]"});
  EXPECT_EQ(c.adapt.lr, 0.25);
  EXPECT_EQ(c.predictor.method, Method::kNexCp);
  EXPECT_EQ(c.schedule.domains[1].severity, 2);
  EXPECT_EQ(c.schedule.domains[0].severity, 5);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{7, 8, 9}));
  EXPECT_TRUE(c.adapt.enabled);
  EXPECT_EQ(c.sweep.alphas, (std::vector<double>{0.1, 0.3}));
}

TEST(Config, RejectsUnknownAndInvalidFields) {
  EXPECT_EQ(exit_code_of(R"({"bogus": 1})"), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of(R"({"model": {"learning_rate": 1}})"), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("", {"model.lrr=0.1"}), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("", {"predictor.alpha=1.5"}), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("", {"predictor.beta=-1"}), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("", {"predictor.method=APS"}), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("", {"stream.domains[0].severity=9"}), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("", {"stream.domains[7].severity=1"}), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("", {"stream.batch_size=0"}), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("", {"model.ema_momentum=1.5"}), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("", {"source.n_calib=0"}), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("", {"predictor.alpha=\"high\""}), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("", {"no_equals_sign"}), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("{ not json"), kExitInvalidConfig);
  EXPECT_EQ(exit_code_of("", {"jobs=0"}), kExitInvalidConfig);
}

TEST(Config, HashIgnoresSeedsJobsAndOutput) {
  const ExperimentConfig a = parse_config("");
  const ExperimentConfig b = parse_config("", {"seeds=[1,2]", "jobs=4", "output.dir=\"x\""});
  const ExperimentConfig c = parse_config("", {"predictor.alpha=0.2"});
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, PredictorsPrimaryFirstAndDeduplicated) {
  const ExperimentConfig c = parse_config(
      "", {"predictor.method=CUI", "predictor.alpha=0.1", "predictor.beta=4",
           "sweep.methods=[\"THR\",\"CUI\"]", "sweep.alphas=[0.1,0.2]", "sweep.betas=[1,4]"});
  const auto p = c.predictors();
  ASSERT_EQ(p.size(), 6u);
  EXPECT_EQ(p[0].method, Method::kCui);
  EXPECT_EQ(p[0].beta, 4.0);
  int cui = 0;
  for (const auto& q : p) cui += q.method == Method::kCui;
  EXPECT_EQ(cui, 4);  // primary (0.1, 4) is not repeated
}

TEST(Config, OutputDirFallbacks) {
  ExperimentConfig c = default_config();
  c.output.dir = "explicit";
  EXPECT_EQ(c.output_dir(), "explicit");
  c.output.dir.clear();
  ::setenv("CUI_OUTPUT_DIR", "/tmp/from_env", 1);
  EXPECT_EQ(c.output_dir(), "/tmp/from_env");
  ::unsetenv("CUI_OUTPUT_DIR");
  EXPECT_EQ(c.output_dir(), "results");
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "cui_config_test.json";
  std::ofstream(path) << R"({"predictor": {"alpha": 0.3}})";
  EXPECT_EQ(load_config(path, {"predictor.beta=2"}).predictor.alpha, 0.3);
  EXPECT_EQ(load_config(path, {"predictor.beta=2"}).predictor.beta, 2.0);
  std::filesystem::remove(path);
  try {
    load_config(path);
    FAIL();
  } catch (const ExitError& e) {
    EXPECT_EQ(e.exit_code(), kExitInvalidConfig);
  }
}

}  // namespace
}  // namespace cui::harness
