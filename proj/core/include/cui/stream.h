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

// Synthetic continual-shift stream: a Gaussian-mixture source task, five
// parametric corruption kinds with severities 0..5, domain schedules and the
// two calibration-set constructions.

#ifndef CUI_STREAM_H_
#define CUI_STREAM_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cui/model.h"
#include "cui/seed.h"

namespace cui {

struct SourceTaskConfig {
  int num_classes = 10;
  int dim = 16;
  // Class means are random directions scaled to this norm.
  double radius = 4.5;
  // Isotropic per-class standard deviation.
  double class_scale = 1.0;
};

class SourceTask {
 public:
  SourceTask(const SourceTaskConfig& config, std::uint64_t seed);

  int num_classes() const { return config_.num_classes; }
  int dim() const { return config_.dim; }
  const SourceTaskConfig& config() const { return config_; }
  // K x d, one class mean per row.
  const Matrix& means() const { return means_; }
  // Mean of the mixture under the uniform class prior.
  const Vector& global_mean() const { return global_mean_; }

  // Labels uniform over classes, features mean[y] + scale * N(0, I).
  void sample(Rng& rng, std::size_t n, Matrix& x, std::vector<int>& y) const;

 private:
  SourceTaskConfig config_;
  Matrix means_;
  Vector global_mean_;
};

struct LabeledSplit {
  Matrix features;
  std::vector<int> labels;
  // Indices into the pool of source draws the splits were cut from.
  std::vector<std::size_t> indices;

  std::size_t size() const { return labels.size(); }
};

enum class CalibrationConstruction { kPrivacyFirst, kEfficiencyFirst };

std::string_view to_string(CalibrationConstruction c);
CalibrationConstruction parse_calibration_construction(std::string_view s);

// Fixed labeled sample of the source distribution. Only readable.
class CalibrationSet {
 public:
  CalibrationSet(LabeledSplit split, CalibrationConstruction construction);

  const Matrix& features() const { return split_.features; }
  std::span<const int> labels() const { return split_.labels; }
  std::span<const std::size_t> indices() const { return split_.indices; }
  CalibrationConstruction construction() const { return construction_; }
  std::size_t size() const { return split_.size(); }

 private:
  LabeledSplit split_;
  CalibrationConstruction construction_;
};

struct SourceSplits {
  LabeledSplit train;
  CalibrationSet calibration;
  LabeledSplit heldout;
};

// privacy_first draws calibration samples from fresh pool entries that are
// never in train; efficiency_first picks them without replacement from the
// train split. Throws kInvalidConfig for empty train/calibration sizes or
// efficiency_first with n_calib > n_train.
SourceSplits make_source(const SourceTask& task, std::size_t n_train,
                         std::size_t n_calib, std::size_t n_heldout,
                         CalibrationConstruction construction, std::uint64_t seed);

enum class CorruptionKind {
  kRotate,
  kGaussianNoise,
  kShiftMeans,
  kFeatureScale,
  kMeanCollapse,
};

inline constexpr int kMaxSeverity = 5;

std::string_view to_string(CorruptionKind k);
CorruptionKind parse_corruption_kind(std::string_view s);

// Per-severity-step magnitudes.
struct CorruptionParams {
  double theta0 = 0.15;      // rotation angle (radians)
  int rotate_planes = 0;     // planes rotated; 0 means all d/2
  double sigma0 = 0.5;       // additive noise std
  double shift0 = 1.0;       // mean displacement
  double c0 = 0.4;           // per-coordinate scale factor step
  double lambda0 = 0.15;     // interpolation toward the global mean
};

class Corruption {
 public:
  // Throws kInvalidConfig when severity is outside 0..5. The fixed random
  // elements (rotation basis, shift direction, scale signs) are drawn from
  // `seed`.
  Corruption(CorruptionKind kind, int severity, std::uint64_t seed, int dim,
             const Vector& global_mean, const CorruptionParams& params = {});

  CorruptionKind kind() const { return kind_; }
  int severity() const { return severity_; }

  // Corrupts one row in place. Only gaussian_noise reads `rng`.
  void apply(std::span<double> x, Rng& rng) const;

 private:
  CorruptionKind kind_;
  int severity_;
  CorruptionParams params_;
  Matrix basis_;             // rotate: orthonormal, columns span the planes
  Vector direction_;         // shift_means: unit vector
  Vector scale_;             // feature_scale: per-coordinate factors
  Vector global_mean_;       // mean_collapse target
};

std::vector<double> corrupt(std::span<const double> x, const Corruption& c, Rng& rng);

struct DomainSpec {
  CorruptionKind kind = CorruptionKind::kRotate;
  int severity = 0;
  std::size_t samples = 0;
};

struct StreamSchedule {
  std::vector<DomainSpec> domains;
  std::size_t batch_size = 64;
  CorruptionParams corruption;
};

// rotate -> gaussian_noise -> shift_means -> feature_scale -> mean_collapse.
StreamSchedule headline_schedule(int severity, std::size_t samples_per_domain,
                                 std::size_t batch_size);

struct TestBatch {
  std::size_t index = 0;
  std::size_t domain = 0;
  Matrix features;
};

// Travels separately so that nothing on the adaptation path can see labels.
struct BatchLabels {
  std::vector<int> labels;
};

struct StreamItem {
  TestBatch batch;
  BatchLabels labels;
};

// Deterministic iterator over a schedule. Batches never straddle a domain
// boundary, so the last batch of a domain may be short.
class Stream {
 public:
  Stream(const SourceTask& task, StreamSchedule schedule, std::uint64_t seed);

  std::optional<StreamItem> next_batch();
  const StreamSchedule& schedule() const { return schedule_; }

 private:
  void enter_domain(std::size_t d);

  const SourceTask& task_;
  StreamSchedule schedule_;
  std::uint64_t seed_;
  std::size_t domain_ = 0;
  std::size_t emitted_in_domain_ = 0;
  std::size_t batch_index_ = 0;
  std::optional<Corruption> corruption_;
  Rng rng_;
};

}  // namespace cui

#endif  // CUI_STREAM_H_
