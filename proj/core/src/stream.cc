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

#include "cui/stream.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/QR>

#include "cui/error.h"

namespace cui {
namespace {

Vector gaussian_vector(Rng& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

LabeledSplit take_rows(const Matrix& x, const std::vector<int>& y,
                       const std::vector<std::size_t>& rows) {
  LabeledSplit s;
  s.features.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  s.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.features.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    s.labels.push_back(y[rows[i]]);
  }
  s.indices = rows;
  return s;
}

std::vector<std::size_t> index_range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> v(end - begin);
  std::iota(v.begin(), v.end(), begin);
  return v;
}

}  // namespace

SourceTask::SourceTask(const SourceTaskConfig& config, std::uint64_t seed)
    : config_(config) {
  if (config.num_classes < 2 || config.dim < 2) {
    fail(ErrorCode::kInvalidConfig, "task needs at least 2 classes and 2 dimensions");
  }
  if (!(config.radius > 0.0) || !(config.class_scale > 0.0)) {
    fail(ErrorCode::kInvalidConfig, "task radius and class scale must be positive");
  }
  Rng rng(derive_seed(seed, "task.means"));
  means_.resize(config.num_classes, config.dim);
  for (int k = 0; k < config.num_classes; ++k) {
    Vector v = gaussian_vector(rng, config.dim);
    means_.row(k) = (config.radius / v.norm()) * v.transpose();
  }
  global_mean_ = means_.colwise().mean().transpose();
}

void SourceTask::sample(Rng& rng, std::size_t n, Matrix& x, std::vector<int>& y) const {
  std::uniform_int_distribution<int> label(0, config_.num_classes - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  x.resize(static_cast<Eigen::Index>(n), config_.dim);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = label(rng);
    y[i] = c;
    for (int j = 0; j < config_.dim; ++j) {
      x(static_cast<Eigen::Index>(i), j) = means_(c, j) + config_.class_scale * normal(rng);
    }
  }
}

std::string_view to_string(CalibrationConstruction c) {
  return c == CalibrationConstruction::kPrivacyFirst ? "privacy_first"
                                                     : "efficiency_first";
}

CalibrationConstruction parse_calibration_construction(std::string_view s) {
  if (s == "privacy_first") return CalibrationConstruction::kPrivacyFirst;
  if (s == "efficiency_first") return CalibrationConstruction::kEfficiencyFirst;
  fail(ErrorCode::kInvalidConfig,
       "unknown calibration construction '" + std::string(s) + "'");
}

CalibrationSet::CalibrationSet(LabeledSplit split, CalibrationConstruction construction)
    : split_(std::move(split)), construction_(construction) {}

SourceSplits make_source(const SourceTask& task, std::size_t n_train,
                         std::size_t n_calib, std::size_t n_heldout,
                         CalibrationConstruction construction, std::uint64_t seed) {
  if (n_train < 1 || n_calib < 1) {
    fail(ErrorCode::kInvalidConfig, "n_train and n_calib must be at least 1");
  }
  const bool privacy = construction == CalibrationConstruction::kPrivacyFirst;
  if (!privacy && n_calib > n_train) {
    fail(ErrorCode::kInvalidConfig,
         "efficiency_first needs n_calib <= n_train (" + std::to_string(n_calib) +
             " > " + std::to_string(n_train) + ")");
  }
  // Pool layout: [train | calibration (privacy_first only) | heldout].
  const std::size_t fresh_calib = privacy ? n_calib : 0;
  const std::size_t pool = n_train + fresh_calib + n_heldout;
  Rng rng(derive_seed(seed, "source.pool"));
  Matrix x;
  std::vector<int> y;
  task.sample(rng, pool, x, y);

  std::vector<std::size_t> calib_rows;
  if (privacy) {
    calib_rows = index_range(n_train, n_train + n_calib);
  } else {
    calib_rows = index_range(0, n_train);
    Rng pick(derive_seed(seed, "source.calibration_pick"));
    std::shuffle(calib_rows.begin(), calib_rows.end(), pick);
    calib_rows.resize(n_calib);
    std::sort(calib_rows.begin(), calib_rows.end());
  }
  const std::size_t held_begin = n_train + fresh_calib;
  return SourceSplits{
      take_rows(x, y, index_range(0, n_train)),
      CalibrationSet(take_rows(x, y, calib_rows), construction),
      take_rows(x, y, index_range(held_begin, held_begin + n_heldout)),
  };
}

std::string_view to_string(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::kRotate:
      return "rotate";
    case CorruptionKind::kGaussianNoise:
      return "gaussian_noise";
    case CorruptionKind::kShiftMeans:
      return "shift_means";
    case CorruptionKind::kFeatureScale:
      return "feature_scale";
    case CorruptionKind::kMeanCollapse:
      return "mean_collapse";
  }
  return "rotate";
}

CorruptionKind parse_corruption_kind(std::string_view s) {
  for (auto k : {CorruptionKind::kRotate, CorruptionKind::kGaussianNoise,
                 CorruptionKind::kShiftMeans, CorruptionKind::kFeatureScale,
                 CorruptionKind::kMeanCollapse}) {
    if (s == to_string(k)) return k;
  }
  fail(ErrorCode::kInvalidConfig, "unknown corruption kind '" + std::string(s) + "'");
}

Corruption::Corruption(CorruptionKind kind, int severity, std::uint64_t seed, int dim,
                       const Vector& global_mean, const CorruptionParams& params)
    : kind_(kind), severity_(severity), params_(params), global_mean_(global_mean) {
  if (severity < 0 || severity > kMaxSeverity) {
    fail(ErrorCode::kInvalidConfig,
         "severity must lie in 0..5, got " + std::to_string(severity));
  }
  if (global_mean.size() != dim) {
    fail(ErrorCode::kInvalidConfig, "global mean dimension mismatch");
  }
  Rng rng(seed);
  switch (kind) {
    case CorruptionKind::kRotate: {
      Matrix g(dim, dim);
      for (int i = 0; i < dim; ++i) g.row(i) = gaussian_vector(rng, dim).transpose();
      basis_ = Eigen::HouseholderQR<Matrix>(g).householderQ();
      const int planes = params.rotate_planes > 0 ? params.rotate_planes : dim / 2;
      if (2 * planes > dim) {
        fail(ErrorCode::kInvalidConfig, "rotate_planes exceeds d/2");
      }
      params_.rotate_planes = planes;
      break;
    }
    case CorruptionKind::kShiftMeans: {
      Vector u = gaussian_vector(rng, dim);
      direction_ = u / u.norm();
      break;
    }
    case CorruptionKind::kFeatureScale: {
      // Half the coordinates stretch and half shrink, by a seeded
      // permutation, so the transform changes shape rather than overall size.
      std::vector<int> order(dim);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      const double f = 1.0 + severity * params.c0;
      scale_.resize(dim);
      for (int i = 0; i < dim; ++i) scale_[order[i]] = (i % 2 == 0) ? f : 1.0 / f;
      break;
    }
    case CorruptionKind::kGaussianNoise:
    case CorruptionKind::kMeanCollapse:
      break;
  }
}

void Corruption::apply(std::span<double> x, Rng& rng) const {
  if (severity_ == 0) return;
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n != global_mean_.size()) {
    fail(ErrorCode::kInvalidInput, "corruption dimension mismatch");
  }
  Eigen::Map<Vector> v(x.data(), n);
  const double s = static_cast<double>(severity_);
  switch (kind_) {
    case CorruptionKind::kRotate: {
      Vector z = basis_.transpose() * v;
      const double th = s * params_.theta0;
      const double c = std::cos(th);
      const double sn = std::sin(th);
      for (int p = 0; p < params_.rotate_planes; ++p) {
        const double a = z[2 * p];
        const double b = z[2 * p + 1];
        z[2 * p] = c * a - sn * b;
        z[2 * p + 1] = sn * a + c * b;
      }
      v = basis_ * z;
      break;
    }
    case CorruptionKind::kGaussianNoise: {
      std::normal_distribution<double> normal(0.0, s * params_.sigma0);
      for (Eigen::Index i = 0; i < n; ++i) v[i] += normal(rng);
      break;
    }
    case CorruptionKind::kShiftMeans:
      v += (s * params_.shift0) * direction_;
      break;
    case CorruptionKind::kFeatureScale:
      v = v.cwiseProduct(scale_);
      break;
    case CorruptionKind::kMeanCollapse:
      v += (s * params_.lambda0) * (global_mean_ - v);
      break;
  }
}

std::vector<double> corrupt(std::span<const double> x, const Corruption& c, Rng& rng) {
  std::vector<double> out(x.begin(), x.end());
  c.apply(out, rng);
  return out;
}

StreamSchedule headline_schedule(int severity, std::size_t samples_per_domain,
                                 std::size_t batch_size) {
  StreamSchedule s;
  s.batch_size = batch_size;
  for (auto k : {CorruptionKind::kRotate, CorruptionKind::kGaussianNoise,
                 CorruptionKind::kShiftMeans, CorruptionKind::kFeatureScale,
                 CorruptionKind::kMeanCollapse}) {
    s.domains.push_back({k, severity, samples_per_domain});
  }
  return s;
}

Stream::Stream(const SourceTask& task, StreamSchedule schedule, std::uint64_t seed)
    : task_(task), schedule_(std::move(schedule)), seed_(seed) {
  if (schedule_.batch_size < 1) {
    fail(ErrorCode::kInvalidConfig, "batch size must be at least 1");
  }
  for (const auto& d : schedule_.domains) {
    if (d.severity < 0 || d.severity > kMaxSeverity) {
      fail(ErrorCode::kInvalidConfig, "severity must lie in 0..5");
    }
  }
  enter_domain(0);
}

void Stream::enter_domain(std::size_t d) {
  domain_ = d;
  emitted_in_domain_ = 0;
  corruption_.reset();
  if (d >= schedule_.domains.size()) return;
  const DomainSpec& spec = schedule_.domains[d];
  // Keyed by kind, so a kind gets the same transform wherever it appears.
  const auto kind_tag = static_cast<std::uint64_t>(spec.kind);
  corruption_.emplace(spec.kind, spec.severity,
                      derive_seed(seed_, "stream.corruption", kind_tag), task_.dim(),
                      task_.global_mean(), schedule_.corruption);
  rng_.seed(derive_seed(seed_, "stream.domain", d));
}

std::optional<StreamItem> Stream::next_batch() {
  while (domain_ < schedule_.domains.size() &&
         emitted_in_domain_ >= schedule_.domains[domain_].samples) {
    enter_domain(domain_ + 1);
  }
  if (domain_ >= schedule_.domains.size()) return std::nullopt;

  const std::size_t left = schedule_.domains[domain_].samples - emitted_in_domain_;
  const std::size_t n = std::min(schedule_.batch_size, left);
  StreamItem item;
  item.batch.index = batch_index_++;
  item.batch.domain = domain_;
  task_.sample(rng_, n, item.batch.features, item.labels.labels);
  std::vector<double> row(static_cast<std::size_t>(task_.dim()));
  for (Eigen::Index i = 0; i < item.batch.features.rows(); ++i) {
    Eigen::Map<Vector>(row.data(), task_.dim()) = item.batch.features.row(i).transpose();
    corruption_->apply(row, rng_);
    item.batch.features.row(i) = Eigen::Map<const Vector>(row.data(), task_.dim()).transpose();
  }
  emitted_in_domain_ += n;
  return item;
}

}  // namespace cui
