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

// Turns step outcomes plus the label channel into result rows and metrics.
// Shared by simulate and replay so both emit identical numbers.

#ifndef CUI_HARNESS_RECORDER_H_
#define CUI_HARNESS_RECORDER_H_

#include <span>
#include <vector>

#include "cui/adaptation.h"
#include "cui/harness/experiment.h"

namespace cui::harness {

class Recorder {
 public:
  Recorder(std::uint64_t seed, std::vector<PredictorConfig> predictors)
      : seed_(seed), predictors_(std::move(predictors)) {
    for (const auto& p : predictors_) accumulators_.emplace_back(p.alpha);
  }

  void record(const StepOutcome& step, std::size_t batch_index, std::size_t domain,
              std::span<const int> labels) {
    double mean_gamma = 0.0;
    for (double g : step.gammas) mean_gamma += g;
    if (!step.gammas.empty()) mean_gamma /= static_cast<double>(step.gammas.size());

    for (std::size_t k = 0; k < predictors_.size(); ++k) {
      const PredictorOutcome& po = step.predictors[k];
      MetricCounts batch;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const PredictionSet& set = po.sets[i];
        const bool covered = set.contains(labels[i]);
        accumulators_[k].update(step.points[i], set.size(), covered, labels[i], domain);
        batch.samples += 1;
        batch.errors += step.points[i] != labels[i] ? 1 : 0;
        batch.covered += covered ? 1 : 0;
        batch.set_size_total += set.size();
      }
      const MetricRow b = finalize_counts(batch, po.config.alpha);
      const MetricRow c = finalize_counts(accumulators_[k].overall(), po.config.alpha);
      BatchRow row;
      row.seed = seed_;
      row.batch = batch_index;
      row.domain = domain;
      row.method = po.config.method;
      row.alpha = po.config.alpha;
      row.beta = po.config.beta;
      row.batch_size = step.batch_size;
      row.rho_raw = step.shift.rho;
      row.rho_centered = step.shift.rho_centered;
      row.threshold = po.threshold.value;
      row.batch_err = b.err;
      row.batch_cov = b.cov;
      row.batch_ine = b.ine;
      row.cum_err = c.err;
      row.cum_cov = c.cov;
      row.cum_ine = c.ine;
      row.loss = step.loss;
      row.mean_gamma = mean_gamma;
      rows_.push_back(row);
    }
  }

  SeedResult finish(double source_accuracy) && {
    SeedResult r;
    r.seed = seed_;
    r.source_accuracy = source_accuracy;
    r.rows = std::move(rows_);
    for (std::size_t k = 0; k < predictors_.size(); ++k) {
      MetricsReport rep = accumulators_[k].finalize();
      auto summary = [&](const MetricRow& m) {
        SummaryRow s;
        s.seed = seed_;
        s.method = predictors_[k].method;
        s.alpha = predictors_[k].alpha;
        s.beta = predictors_[k].beta;
        s.domain = m.domain;
        s.samples = m.samples;
        s.err = m.err;
        s.cov = m.cov;
        s.ine = m.ine;
        s.kappa = m.kappa;
        return s;
      };
      for (const auto& d : rep.domains) r.summary.push_back(summary(d));
      r.summary.push_back(summary(rep.overall));
      r.reports.push_back(std::move(rep));
    }
    r.predictors = std::move(predictors_);
    return r;
  }

 private:
  std::uint64_t seed_;
  std::vector<PredictorConfig> predictors_;
  std::vector<MetricsAccumulator> accumulators_;
  std::vector<BatchRow> rows_;
};

}  // namespace cui::harness

#endif  // CUI_HARNESS_RECORDER_H_
