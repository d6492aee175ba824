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

#include "cui/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cui/error.h"

namespace cui {
namespace {

void require_shape(const ModelShape& s) {
  if (s.input_dim < 1 || s.num_classes < 2 || s.hidden_dim < 0) {
    fail(ErrorCode::kInvalidInput, "model needs d >= 1, K >= 2, h >= 0");
  }
}

LayerStack zero_stack(const ModelShape& s) {
  LayerStack st;
  auto add = [&](int out, int in) {
    st.layers.push_back({Matrix::Zero(out, in), Vector::Zero(out)});
  };
  if (s.hidden_dim > 0) {
    add(s.hidden_dim, s.input_dim);
    add(s.num_classes, s.hidden_dim);
  } else {
    add(s.num_classes, s.input_dim);
  }
  return st;
}

bool same_shape(const LayerStack& a, const LayerStack& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].weight.rows() != b.layers[i].weight.rows() ||
        a.layers[i].weight.cols() != b.layers[i].weight.cols() ||
        a.layers[i].bias.size() != b.layers[i].bias.size()) {
      return false;
    }
  }
  return true;
}

bool all_finite(const LayerStack& st) {
  for (const auto& l : st.layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

// Activations of every layer input plus the final logits.
struct ForwardTrace {
  std::vector<Matrix> inputs;
  Matrix logits;
};

ForwardTrace trace_forward(const ModelParams& params, const Matrix& x) {
  if (x.cols() != params.shape().input_dim) {
    fail(ErrorCode::kInvalidInput, "feature dimension " + std::to_string(x.cols()) +
                                       " does not match model input " +
                                       std::to_string(params.shape().input_dim));
  }
  ForwardTrace tr;
  const auto& layers = params.stack().layers;
  Matrix a = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Matrix z = a * layers[i].weight.transpose();
    z.rowwise() += layers[i].bias.transpose();
    tr.inputs.push_back(std::move(a));
    if (i + 1 < layers.size()) {
      a = z.array().tanh().matrix();
    } else {
      tr.logits = std::move(z);
    }
  }
  return tr;
}

}  // namespace

std::size_t LayerStack::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<double> LayerStack::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

void LayerStack::assign_flat(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    fail(ErrorCode::kInvalidInput, "flat parameter count mismatch");
  }
  std::size_t at = 0;
  for (auto& l : layers) {
    std::copy_n(flat.data() + at, l.weight.size(), l.weight.data());
    at += l.weight.size();
    std::copy_n(flat.data() + at, l.bias.size(), l.bias.data());
    at += l.bias.size();
  }
}

ModelParams::ModelParams(ModelShape shape) : shape_(shape) {
  require_shape(shape_);
  stack_ = zero_stack(shape_);
}

ModelParams ModelParams::random(ModelShape shape, std::uint64_t seed) {
  ModelParams p(shape);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& l : p.stack_.layers) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(l.weight.cols()));
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) {
      l.weight.data()[i] = scale * normal(rng);
    }
  }
  return p;
}

void ModelParams::assign(const LayerStack& values) {
  if (!same_shape(stack_, values)) {
    fail(ErrorCode::kInvalidInput, "parameter shapes do not match the model");
  }
  if (!all_finite(values)) {
    fail(ErrorCode::kInvalidInput, "parameters must be finite");
  }
  stack_ = values;
  ++version_;
}

std::vector<double> forward(const ModelParams& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.shape().input_dim) {
    fail(ErrorCode::kInvalidInput, "feature dimension does not match model input");
  }
  Matrix row(1, x.size());
  std::copy(x.begin(), x.end(), row.data());
  const Matrix logits = forward_batch(params, row);
  return std::vector<double>(logits.data(), logits.data() + logits.size());
}

Matrix forward_batch(const ModelParams& params, const Matrix& x) {
  return trace_forward(params, x).logits;
}

Matrix softmax_rows(const Matrix& logits, double temperature) {
  Matrix p = logits / temperature;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double mx = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - mx).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

LossAndGrad soft_target_loss_and_grad(const ModelParams& params, const Matrix& x,
                                      const Matrix& targets,
                                      std::span<const double> weights, double l2) {
  const Eigen::Index n = x.rows();
  const int k = params.shape().num_classes;
  if (targets.rows() != n || targets.cols() != k ||
      static_cast<Eigen::Index>(weights.size()) != n) {
    fail(ErrorCode::kInvalidInput, "batch, targets and weights disagree in shape");
  }
  if (n == 0) fail(ErrorCode::kEmptyInput, "loss needs at least one sample");

  ForwardTrace tr = trace_forward(params, x);
  if (!tr.logits.allFinite()) {
    fail(ErrorCode::kNumericalError, "non-finite logits in forward pass");
  }
  const Matrix p = softmax_rows(tr.logits);

  LossAndGrad out;
  out.grad = zero_stack(params.shape());
  Matrix dz(n, k);
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = weights[i];
    double row_loss = 0.0;
    double live_mass = 0.0;
    for (int y = 0; y < k; ++y) {
      const double t = targets(i, y);
      if (p(i, y) >= kLogFloor) {
        row_loss -= t * std::log(p(i, y));
        live_mass += t;
      } else {
        row_loss -= t * std::log(kLogFloor);
      }
    }
    loss += w * row_loss;
    for (int y = 0; y < k; ++y) {
      const double t_live = p(i, y) >= kLogFloor ? targets(i, y) : 0.0;
      dz(i, y) = w * inv_n * (p(i, y) * live_mass - t_live);
    }
  }
  out.loss = loss * inv_n;

  const auto& layers = params.stack().layers;
  for (std::size_t li = layers.size(); li-- > 0;) {
    const Matrix& a = tr.inputs[li];
    out.grad.layers[li].weight = dz.transpose() * a;
    out.grad.layers[li].bias = dz.colwise().sum().transpose();
    if (l2 > 0.0) {
      out.grad.layers[li].weight += l2 * layers[li].weight;
      out.loss += 0.5 * l2 * layers[li].weight.squaredNorm();
    }
    if (li > 0) {
      Matrix da = dz * layers[li].weight;
      dz = (da.array() * (1.0 - a.array().square())).matrix();
    }
  }
  if (!std::isfinite(out.loss)) {
    fail(ErrorCode::kNumericalError, "non-finite loss");
  }
  return out;
}

LossAndGrad cross_entropy_loss_and_grad(const ModelParams& params, const Matrix& x,
                                        std::span<const int> labels, double l2) {
  const int k = params.shape().num_classes;
  Matrix targets = Matrix::Zero(x.rows(), k);
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    fail(ErrorCode::kInvalidInput, "label count does not match batch");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) {
      fail(ErrorCode::kInvalidInput, "label out of range");
    }
    targets(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  const std::vector<double> ones(labels.size(), 1.0);
  return soft_target_loss_and_grad(params, x, targets, ones, l2);
}

void sgd_step(ModelParams& params, const LayerStack& grad, double lr) {
  if (!same_shape(params.stack_, grad)) {
    fail(ErrorCode::kInvalidInput, "gradient shape does not match parameters");
  }
  for (std::size_t i = 0; i < grad.layers.size(); ++i) {
    params.stack_.layers[i].weight -= lr * grad.layers[i].weight;
    params.stack_.layers[i].bias -= lr * grad.layers[i].bias;
  }
  ++params.version_;
}

ModelPair::ModelPair(ModelParams source, double ema_momentum)
    : source_(std::move(source)),
      teacher_(source_),
      student_(source_),
      ema_momentum_(ema_momentum) {
  if (!(ema_momentum >= 0.0 && ema_momentum <= 1.0)) {
    fail(ErrorCode::kInvalidConfig, "ema momentum must lie in [0,1]");
  }
}

void ModelPair::ema_update() {
  const double m = ema_momentum_;
  for (std::size_t i = 0; i < teacher_.stack_.layers.size(); ++i) {
    auto& t = teacher_.stack_.layers[i];
    const auto& s = student_.stack_.layers[i];
    t.weight = m * t.weight + (1.0 - m) * s.weight;
    t.bias = m * t.bias + (1.0 - m) * s.bias;
  }
  ++teacher_.version_;
}

LossAndGrad weighted_ce_loss_and_grad(const ModelPair& pair, const Matrix& batch,
                                      std::span<const double> gammas,
                                      double temperature) {
  if (!(temperature > 0.0)) {
    fail(ErrorCode::kInvalidConfig, "teacher temperature must be positive");
  }
  const Matrix teacher_logits = forward_batch(pair.teacher(), batch);
  if (!teacher_logits.allFinite()) {
    fail(ErrorCode::kNumericalError, "non-finite teacher logits");
  }
  const Matrix targets = softmax_rows(teacher_logits, temperature);
  return soft_target_loss_and_grad(pair.student(), batch, targets, gammas);
}

}  // namespace cui
