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

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cui/error.h"
#include "cui/stream.h"

namespace cui {
namespace {

TEST(GammaWeights, Examples) {
  const std::vector<std::size_t> s = {1, 3, 5};
  const auto w = gamma_weights(s, 1e-9);
  EXPECT_DOUBLE_EQ(w.gammas[0], 1.0);
  EXPECT_NEAR(w.gammas[1], 0.5, 1e-9);
  EXPECT_NEAR(w.gammas[2], 0.0, 1e-9);
  EXPECT_GT(w.gammas[2], 0.0);

  const std::vector<std::size_t> empty = {0, 0};
  EXPECT_EQ(gamma_weights(empty).gammas, (std::vector<double>{0.0, 0.0}));

  const std::vector<std::size_t> singles = {1, 0, 1};
  EXPECT_EQ(gamma_weights(singles).gammas, (std::vector<double>{1.0, 0.0, 1.0}));

  EXPECT_THROW(gamma_weights(std::vector<std::size_t>{}), Error);
  EXPECT_THROW(gamma_weights(s, 0.0), Error);
}

TEST(GammaWeights, RangeAndMonotonicity) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> size(0, 10);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::size_t> s(1 + t % 40);
    for (auto& v : s) v = size(rng);
    const auto w = gamma_weights(s).gammas;
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_GE(w[i], 0.0);
      EXPECT_LE(w[i], 1.0);
      if (s[i] == 0) EXPECT_EQ(w[i], 0.0);
      if (s[i] == 1) EXPECT_EQ(w[i], 1.0);
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[i] > 0 && s[j] > 0 && s[i] < s[j]) EXPECT_GE(w[i], w[j]);
      }
    }
  }
}

// A trained-enough source model and a corrupted stream, small enough for
// unit tests.
struct Fixture {
  SourceTask task{SourceTaskConfig{}, 5};
  SourceSplits splits = make_source(task, 200, 50, 10, CalibrationConstruction::kPrivacyFirst, 5);
  ModelParams source = train();
  StreamSchedule schedule = headline_schedule(4, 128, 32);

  ModelParams train() {
    ModelParams p(ModelShape{task.dim(), 0, task.num_classes()});
    for (int e = 0; e < 100; ++e) {
      sgd_step(p, cross_entropy_loss_and_grad(p, splits.train.features, splits.train.labels, 0.01)
                      .grad,
               0.5);
    }
    return p;
  }
};

PredictorConfig cui_cfg(double beta) {
  PredictorConfig c;
  c.method = Method::kCui;
  c.alpha = 0.1;
  c.beta = beta;
  return c;
}

TEST(CalibrationState, RefreshesOnlyWhenVersionChanges) {
  Fixture f;
  CalibrationState cal(f.splits.calibration, f.source, ShiftConfig{});
  ModelParams current = f.source;
  cal.refresh(current);
  cal.refresh(current);
  EXPECT_EQ(cal.refresh_count(), 1u);
  EXPECT_EQ(cal.scores().scores.size(), f.splits.calibration.size());
  EXPECT_TRUE(cal.estimator().has_calibration_for(current.version()));
  sgd_step(current, ModelParams(current.shape()).stack(), 0.1);
  cal.refresh(current);
  EXPECT_EQ(cal.refresh_count(), 2u);
  EXPECT_EQ(cal.scores().model_version, current.version());
}

TEST(CttaStep, NoAdaptationLeavesModelsAlone) {
  Fixture f;
  ModelPair pair(f.source, 0.9);
  CalibrationState cal(f.splits.calibration, f.source, ShiftConfig{});
  Stream stream(f.task, f.schedule, 1);
  const auto item = stream.next_batch();
  ASSERT_TRUE(item);
  const auto vs = pair.student().version();
  const auto vt = pair.teacher().version();
  AdaptConfig adapt;
  adapt.enabled = false;
  const auto out = ctta_step(pair, item->batch, cal, cui_cfg(1.0), adapt);
  EXPECT_EQ(pair.student().version(), vs);
  EXPECT_EQ(pair.teacher().version(), vt);
  EXPECT_TRUE(out.gammas.empty());
  EXPECT_EQ(out.sets.size(), item->batch.features.rows());
  EXPECT_EQ(out.points.size(), out.sets.size());
}

TEST(CttaStep, PredictionsUseTheIncomingModel) {
  Fixture f;
  AdaptConfig on;
  on.enabled = true;
  on.lr = 0.5;
  AdaptConfig off = on;
  off.enabled = false;
  ModelPair adapting(f.source, 0.9);
  CalibrationState cal_a(f.splits.calibration, f.source, ShiftConfig{});
  Stream stream(f.task, f.schedule, 2);
  const auto cfgs = std::vector<PredictorConfig>{cui_cfg(2.0)};
  int batches = 0;
  while (auto item = stream.next_batch()) {
    // Frozen copy of the state entering this batch.
    ModelPair frozen = adapting;
    CalibrationState cal_f(f.splits.calibration, f.source, ShiftConfig{});
    const auto ref = ctta_step_multi(frozen, item->batch, cal_f, cfgs, off);
    const auto out = ctta_step_multi(adapting, item->batch, cal_a, cfgs, on);
    EXPECT_EQ(out.points, ref.points);
    EXPECT_EQ(out.shift.rho_centered, ref.shift.rho_centered);
    EXPECT_EQ(out.predictors[0].threshold.value, ref.predictors[0].threshold.value);
    EXPECT_TRUE(out.adapted);
    ++batches;
  }
  EXPECT_EQ(batches, 20);
}

TEST(CttaStep, UniformGammaEqualsPlainMeanTeacher) {
  Fixture f;
  AdaptConfig adapt;
  adapt.enabled = true;
  adapt.gamma_mode = GammaMode::kUniform;
  ModelPair a(f.source, 0.9);
  ModelPair b(f.source, 0.9);
  CalibrationState cal(f.splits.calibration, f.source, ShiftConfig{});
  Stream stream(f.task, f.schedule, 3);
  const PredictorConfig thr = cui_cfg(0.0);
  for (int i = 0; i < 6; ++i) {
    const auto item = stream.next_batch();
    ASSERT_TRUE(item);
    const auto out = ctta_step(a, item->batch, cal, thr, adapt);
    EXPECT_EQ(out.gammas, std::vector<double>(out.points.size(), 1.0));
    // Hand-written mean-teacher step.
    const std::vector<double> ones(out.points.size(), 1.0);
    const auto lg = weighted_ce_loss_and_grad(b, item->batch.features, ones,
                                              adapt.teacher_temperature);
    EXPECT_EQ(out.loss, lg.loss);
    sgd_step(b.mutable_student(), lg.grad, adapt.lr);
    b.ema_update();
    EXPECT_EQ(a.student().stack().flatten(), b.student().stack().flatten());
    EXPECT_EQ(a.teacher().stack().flatten(), b.teacher().stack().flatten());
  }
}

TEST(CttaStep, AllEmptySetsLeaveStudentUnchanged) {
  Fixture f;
  AdaptConfig adapt;
  adapt.enabled = true;
  ModelPair pair(f.source, 0.9);
  CalibrationState cal(f.splits.calibration, f.source, ShiftConfig{});
  Stream stream(f.task, f.schedule, 4);
  const auto item = stream.next_batch();
  ASSERT_TRUE(item);
  // Literal sign with a huge beta drives the threshold to 0: every set is
  // empty.
  PredictorConfig c = cui_cfg(1e6);
  c.compensation_sign = CompensationSign::kLiteral;
  const auto before = pair.student().stack().flatten();
  const auto v = pair.student().version();
  const auto out = ctta_step(pair, item->batch, cal, c, adapt);
  bool any_positive_shift = out.shift.rho_centered > 0;
  ASSERT_TRUE(any_positive_shift);
  for (const auto& s : out.sets) EXPECT_TRUE(s.empty());
  EXPECT_EQ(out.loss, 0.0);
  for (double g : out.gammas) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(pair.student().stack().flatten(), before);
  EXPECT_GT(pair.student().version(), v);
}

TEST(CttaStep, FirstPredictorDrivesWeights) {
  Fixture f;
  AdaptConfig adapt;
  adapt.enabled = true;
  ModelPair pair(f.source, 0.9);
  CalibrationState cal(f.splits.calibration, f.source, ShiftConfig{});
  Stream stream(f.task, f.schedule, 6);
  const auto item = stream.next_batch();
  ASSERT_TRUE(item);
  const std::vector<PredictorConfig> cfgs = {cui_cfg(4.0), cui_cfg(0.0)};
  const auto out = ctta_step_multi(pair, item->batch, cal, cfgs, adapt);
  std::vector<std::size_t> sizes;
  for (const auto& s : out.predictors[0].sets) sizes.push_back(s.size());
  EXPECT_EQ(out.gammas, gamma_weights(sizes, adapt.delta).gammas);
}

TEST(AdaptConfig, Validation) {
  AdaptConfig a;
  EXPECT_NO_THROW(a.validate());
  a.delta = 0.0;
  EXPECT_THROW(a.validate(), Error);
  a = {};
  a.steps_per_batch = 0;
  EXPECT_THROW(a.validate(), Error);
  a = {};
  a.teacher_temperature = 0.0;
  EXPECT_THROW(a.validate(), Error);
  EXPECT_EQ(parse_gamma_mode(to_string(GammaMode::kUniform)), GammaMode::kUniform);
  EXPECT_THROW(parse_gamma_mode("entropy"), Error);
}

}  // namespace
}  // namespace cui
