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

#include "cui/metrics.h"

#include "cui/error.h"

namespace cui {

MetricCounts& MetricCounts::operator+=(const MetricCounts& o) {
  samples += o.samples;
  errors += o.errors;
  covered += o.covered;
  set_size_total += o.set_size_total;
  return *this;
}

MetricRow finalize_counts(const MetricCounts& c, double alpha) {
  MetricRow r;
  r.samples = c.samples;
  if (c.samples == 0) return r;
  const double n = static_cast<double>(c.samples);
  r.err = static_cast<double>(c.errors) / n;
  r.cov = static_cast<double>(c.covered) / n;
  r.ine = static_cast<double>(c.set_size_total) / n;
  r.kappa = (1.0 - alpha) - r.cov;
  return r;
}

MetricsAccumulator::MetricsAccumulator(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "metrics alpha must lie in (0,1)");
  }
}

void MetricsAccumulator::update(int point, const PredictionSet& set, int label,
                                std::size_t domain) {
  update(point, set.size(), set.contains(label), label, domain);
}

void MetricsAccumulator::update(int point, std::size_t set_size, bool covered,
                                int label, std::size_t domain) {
  if (label < 0) fail(ErrorCode::kInvalidInput, "negative label");
  MetricCounts one;
  one.samples = 1;
  one.errors = point != label ? 1 : 0;
  one.covered = covered ? 1 : 0;
  one.set_size_total = set_size;
  overall_ += one;
  domains_[domain] += one;
}

void MetricsAccumulator::merge(const MetricsAccumulator& other) {
  if (other.alpha_ != alpha_) {
    fail(ErrorCode::kInvalidInput, "cannot merge accumulators with different alpha");
  }
  overall_ += other.overall_;
  for (const auto& [d, c] : other.domains_) domains_[d] += c;
}

MetricsReport MetricsAccumulator::finalize() const {
  if (overall_.samples == 0) {
    fail(ErrorCode::kEmptyInput, "no samples observed");
  }
  MetricsReport rep;
  rep.alpha = alpha_;
  for (const auto& [d, c] : domains_) {
    if (c.samples == 0) continue;
    MetricRow r = finalize_counts(c, alpha_);
    r.domain = d;
    rep.domains.push_back(r);
  }
  rep.overall = finalize_counts(overall_, alpha_);
  return rep;
}

}  // namespace cui
