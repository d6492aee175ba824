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

// Small dense classifiers (linear softmax, or one tanh hidden layer) with
// analytic gradients, and the student/teacher pair used for mean-teacher
// adaptation.

#ifndef CUI_MODEL_H_
#define CUI_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cui {

// Batches are row-major: one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kLogFloor = 1e-12;

struct ModelShape {
  int input_dim = 0;
  int hidden_dim = 0;  // 0 selects the linear model
  int num_classes = 0;

  bool operator==(const ModelShape&) const = default;
};

// weight is (out x in); logits = weight * x + bias.
struct DenseLayer {
  Matrix weight;
  Vector bias;
};

// Parameter-shaped container, also used for gradients.
struct LayerStack {
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const;
  // Flat view in layer order, weights row-major then bias. Used by tests and
  // the snapshot writer.
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);
};

class ModelParams {
 public:
  // All-zero parameters.
  explicit ModelParams(ModelShape shape);
  // Zero biases, weights N(0, 1/in) from `seed`. Linear models are often
  // trained from zero instead; this is mainly for the hidden-layer variant.
  static ModelParams random(ModelShape shape, std::uint64_t seed);

  const ModelShape& shape() const { return shape_; }
  const LayerStack& stack() const { return stack_; }
  std::uint64_t version() const { return version_; }

  // Replaces every parameter; bumps the version. Throws kInvalidInput on a
  // shape mismatch or non-finite entry.
  void assign(const LayerStack& values);

 private:
  friend void sgd_step(ModelParams&, const LayerStack&, double);
  friend class ModelPair;

  ModelShape shape_;
  LayerStack stack_;
  std::uint64_t version_ = 0;
};

// Logits for one sample. Throws kInvalidInput on a dimension mismatch.
std::vector<double> forward(const ModelParams& params, std::span<const double> x);

// Logits for a batch (rows = samples).
Matrix forward_batch(const ModelParams& params, const Matrix& x);

// Row-wise softmax of logits / temperature.
Matrix softmax_rows(const Matrix& logits, double temperature = 1.0);

struct LossAndGrad {
  double loss = 0.0;
  LayerStack grad;
};

// loss = -(1/B) sum_i w_i sum_y t_iy log max(p_iy, 1e-12), p = softmax of the
// model logits. Floored entries contribute no gradient. `l2` adds
// (l2/2)*||W||^2 over weight matrices (not biases). Throws kNumericalError if
// the forward pass produces non-finite values.
LossAndGrad soft_target_loss_and_grad(const ModelParams& params, const Matrix& x,
                                      const Matrix& targets,
                                      std::span<const double> weights,
                                      double l2 = 0.0);

// One-hot cross-entropy helper for pretraining.
LossAndGrad cross_entropy_loss_and_grad(const ModelParams& params, const Matrix& x,
                                        std::span<const int> labels, double l2 = 0.0);

// params <- params - lr * grad; bumps the version even when nothing moves.
void sgd_step(ModelParams& params, const LayerStack& grad, double lr);

enum class CurrentModel { kTeacher, kStudent };

class ModelPair {
 public:
  // Student and teacher start as copies of `source`.
  ModelPair(ModelParams source, double ema_momentum);

  const ModelParams& source() const { return source_; }
  const ModelParams& teacher() const { return teacher_; }
  const ModelParams& student() const { return student_; }
  ModelParams& mutable_student() { return student_; }
  double ema_momentum() const { return ema_momentum_; }

  const ModelParams& current(CurrentModel which) const {
    return which == CurrentModel::kTeacher ? teacher_ : student_;
  }

  // teacher <- m * teacher + (1 - m) * student; bumps the teacher version.
  void ema_update();

 private:
  const ModelParams source_;
  ModelParams teacher_;
  ModelParams student_;
  double ema_momentum_;
};

// Mean-teacher objective: targets are softmax(teacher_logits / temperature),
// held constant, and the gradient is with respect to the student only.
LossAndGrad weighted_ce_loss_and_grad(const ModelPair& pair, const Matrix& batch,
                                      std::span<const double> gammas,
                                      double temperature = 1.0);

// Flat little-endian layout: "CUIM", u32 format version, u32 d, u32 h,
// u32 K, then each layer's weight (row-major f64) followed by its bias.
void save_snapshot(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_snapshot(const std::filesystem::path& path);

}  // namespace cui

#endif  // CUI_MODEL_H_
