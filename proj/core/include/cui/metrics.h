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

// Streaming ERR (point error rate), COV (fraction of sets containing the
// label), INE (mean set size) and coverage gap kappa = (1 - alpha) - COV.

#ifndef CUI_METRICS_H_
#define CUI_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "cui/conformal.h"

namespace cui {

struct MetricCounts {
  std::uint64_t samples = 0;
  std::uint64_t errors = 0;
  std::uint64_t covered = 0;
  std::uint64_t set_size_total = 0;

  MetricCounts& operator+=(const MetricCounts& o);
  bool operator==(const MetricCounts&) const = default;
};

struct MetricRow {
  std::optional<std::size_t> domain;  // empty for the overall row
  std::uint64_t samples = 0;
  double err = 0.0;
  double cov = 0.0;
  double ine = 0.0;
  double kappa = 0.0;
};

struct MetricsReport {
  double alpha = 0.0;
  std::vector<MetricRow> domains;  // ascending domain, observed buckets only
  MetricRow overall;
};

MetricRow finalize_counts(const MetricCounts& c, double alpha);

class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(double alpha);

  double alpha() const { return alpha_; }

  void update(int point, const PredictionSet& set, int label, std::size_t domain);
  // Same, for callers that already reduced the set to (size, covered).
  void update(int point, std::size_t set_size, bool covered, int label,
              std::size_t domain);

  const MetricCounts& overall() const { return overall_; }
  const std::map<std::size_t, MetricCounts>& domains() const { return domains_; }

  // Counter sum; throws kInvalidInput if the alphas differ.
  void merge(const MetricsAccumulator& other);

  // Throws kEmptyInput when nothing was observed.
  MetricsReport finalize() const;

 private:
  double alpha_;
  MetricCounts overall_;
  std::map<std::size_t, MetricCounts> domains_;
};

}  // namespace cui

#endif  // CUI_METRICS_H_
