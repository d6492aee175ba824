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

#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "cui/adaptation.h"
#include "cui/conformal.h"
#include "cui/model.h"
#include "cui/shift.h"
#include "cui/stream.h"

namespace {

using namespace cui;

std::vector<double> uniform_scores(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(n);
  for (double& v : s) v = u(rng);
  return s;
}

void BM_ConformalQuantile(benchmark::State& state) {
  const auto s = uniform_scores(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(conformal_quantile(s, 0.9));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConformalQuantile)->RangeMultiplier(4)->Range(64, 1 << 16)->Complexity();

void BM_WeightedQuantile(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto s = uniform_scores(n, 2);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(0.99, static_cast<double>(n - i));
  for (auto _ : state) benchmark::DoNotOptimize(weighted_quantile(s, w, 0.9));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WeightedQuantile)->RangeMultiplier(4)->Range(64, 1 << 16)->Complexity();

std::vector<JointRepresentation> joints(std::size_t n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 2.0);
  std::vector<JointRepresentation> out;
  std::vector<double> a(k), b(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      a[j] = g(rng);
      b[j] = g(rng);
    }
    out.push_back(joint_representation(a, b));
  }
  return out;
}

// |C| = 50 calibration points against a batch of range(0) test points.
void BM_ShiftEstimate(benchmark::State& state) {
  const auto cal = joints(50, 10, 3);
  const auto batch = joints(static_cast<std::size_t>(state.range(0)), 10, 4);
  ShiftEstimator est(Aggregation::kMean, Centering::kSymmetric);
  est.set_calibration(cal, 0);
  for (auto _ : state) benchmark::DoNotOptimize(est.estimate(batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ShiftEstimate)->Arg(16)->Arg(64)->Arg(256);

// One full test-then-adapt step on a batch of 64.
void BM_CttaStep(benchmark::State& state) {
  const SourceTask task(SourceTaskConfig{}, 0);
  const auto splits = make_source(task, 100, 50, 0, CalibrationConstruction::kPrivacyFirst, 0);
  const ModelParams source =
      ModelParams::random(ModelShape{task.dim(), static_cast<int>(state.range(0)),
                                     task.num_classes()},
                          0);
  Stream stream(task, headline_schedule(5, 64, 64), 0);
  const TestBatch batch = stream.next_batch()->batch;
  ModelPair pair(source, 0.9);
  CalibrationState cal(splits.calibration, source, ShiftConfig{});
  PredictorConfig pred;
  pred.method = Method::kCui;
  AdaptConfig adapt;
  adapt.enabled = true;
  for (auto _ : state) benchmark::DoNotOptimize(ctta_step(pair, batch, cal, pred, adapt));
}
BENCHMARK(BM_CttaStep)->Arg(0)->Arg(64);

}  // namespace

// libbenchmark_main.a ships as LTO bytecode from another compiler build.
BENCHMARK_MAIN();
