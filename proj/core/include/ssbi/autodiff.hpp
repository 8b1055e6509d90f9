/*
 * Copyright (c) 2026 The scatter-sbi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "ssbi/parameters.hpp"

namespace ssbi::nn {

template <typename T>
class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
/// lives.
template <typename T>
class Var {
 public:
  Var() = default;

  const Matrix<T>& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape<T>& tape() const { return *tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape<T>;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode differentiation over matrix-valued nodes. Rows index batch
/// items. Parameters recorded with parameter() receive their gradients in
/// Tensor::grad when backward() runs.
template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Matrix<T> value) { return push(std::move(value), false, {}); }

  Var<T> parameter(Tensor<T>& p) {
    const bool track = grad_enabled_ && p.trainable;
    Tensor<T>* target = &p;
    return push(p.value, track, [target](Tape& t, std::size_t self) {
      target->grad += t.nodes_[self].grad;
    });
  }

  /// Records a node computed from `inputs`. The backward closure is kept only
  /// when some input carries gradient.
  Var<T> record(Matrix<T> value, std::initializer_list<Var<T>> inputs, Backward backward) {
    bool track = false;
    if (grad_enabled_) {
      for (const Var<T>& v : inputs) track = track || nodes_[v.id()].requires_grad;
    }
    return push(std::move(value), track, track ? std::move(backward) : Backward{});
  }
  Var<T> record(Matrix<T> value, std::span<const Var<T>> inputs, Backward backward) {
    bool track = false;
    if (grad_enabled_) {
      for (const Var<T>& v : inputs) track = track || nodes_[v.id()].requires_grad;
    }
    return push(std::move(value), track, track ? std::move(backward) : Backward{});
  }

  const Matrix<T>& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(const Var<T>& v) const { return nodes_[v.id()].requires_grad; }
  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  /// Gradient buffer of a node, allocated as zeros on first use.
  Matrix<T>& grad(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Matrix<T>::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }
  Matrix<T>& grad(const Var<T>& v) { return grad(v.id()); }

  /// Back-propagates from a 1 x 1 node.
  void backward(const Var<T>& root) {
    Node& r = nodes_[root.id()];
    if (r.value.rows() != 1 || r.value.cols() != 1) {
      throw std::invalid_argument("backward() needs a scalar root");
    }
    if (!r.requires_grad) return;
    grad(root.id()).setConstant(T(1));
    for (std::size_t i = root.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || !n.backward || n.grad.size() == 0) continue;
      n.backward(*this, i);
    }
  }

 private:
  struct Node {
    Matrix<T> value;
    Matrix<T> grad;
    bool requires_grad = false;
    Backward backward;
  };

  Var<T> push(Matrix<T> value, bool track, Backward backward) {
    nodes_.push_back(Node{std::move(value), Matrix<T>(), track, std::move(backward)});
    return Var<T>(this, nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  bool grad_enabled_;
};

template <typename T>
const Matrix<T>& Var<T>::value() const {
  return tape_->value(id_);
}

// ---- element-wise and linear algebra ----------------------------------------

/// a * b^T, the usual dense layer product with weights stored (out, in).
template <typename T> Var<T> matmul_nt(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> matmul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
/// a + row, broadcasting a 1 x C row over every row of a.
template <typename T> Var<T> add_row(const Var<T>& a, const Var<T>& row);
/// a (N x C) scaled row-wise by col (N x 1).
template <typename T> Var<T> mul_col(const Var<T>& a, const Var<T>& col);
template <typename T> Var<T> scale(const Var<T>& a, T factor);
template <typename T> Var<T> add_scalar(const Var<T>& a, T offset);
/// Element-wise product with a constant matrix (used for MADE masks).
template <typename T> Var<T> hadamard_const(const Var<T>& a, const Matrix<T>& m);
template <typename T> Var<T> exp(const Var<T>& a);
template <typename T> Var<T> log(const Var<T>& a);
template <typename T> Var<T> tanh(const Var<T>& a);
template <typename T> Var<T> sigmoid(const Var<T>& a);
template <typename T> Var<T> silu(const Var<T>& a);
template <typename T> Var<T> square(const Var<T>& a);
/// Clamp with zero gradient outside [lo, hi].
template <typename T> Var<T> clamp(const Var<T>& a, T lo, T hi);

// ---- reductions and reshaping -------------------------------------------------

template <typename T> Var<T> sum(const Var<T>& a);
template <typename T> Var<T> mean(const Var<T>& a);
/// Per-row sum, N x 1.
template <typename T> Var<T> row_sum(const Var<T>& a);
template <typename T> Var<T> concat_cols(std::span<const Var<T>> parts);
template <typename T> Var<T> slice_cols(const Var<T>& a, Eigen::Index start, Eigen::Index count);
/// out[:, j] = a[:, perm[j]].
template <typename T> Var<T> permute_cols(const Var<T>& a, const std::vector<int>& perm);

// ---- convolutional layers -------------------------------------------------------
// Image batches are N x (C * H * W), channel-major within a row.

struct ConvShape {
  int in_channels = 1;
  int out_channels = 1;
  int in_h = 1;
  int in_w = 1;
  int out_h = 1;
  int out_w = 1;
  int kernel = 3;
  int stride = 1;
  int pad = 1;
};

ConvShape conv_shape(int in_channels, int out_channels, int in_h, int in_w, int kernel,
                     int stride, int pad);
/// Transposed convolution; out = (in - 1) * stride - 2 pad + kernel + output_padding.
ConvShape conv_transpose_shape(int in_channels, int out_channels, int in_h, int in_w,
                               int kernel, int stride, int pad, int output_padding);

/// weight: out_channels x (in_channels * k * k); bias: 1 x out_channels.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, const ConvShape& s);
/// weight: in_channels x (out_channels * k * k); bias: 1 x out_channels.
template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias,
                        const ConvShape& s);

template <typename T>
struct BatchNormState {
  Matrix<T>* running_mean = nullptr;  // 1 x C
  Matrix<T>* running_var = nullptr;   // 1 x C
  T momentum = T(0.1);
  T eps = T(1e-5);
  bool training = true;
};

/// Per-channel batch normalization over (N, H, W). In training mode uses the
/// batch statistics and updates the running buffers.
template <typename T>
Var<T> batch_norm2d(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, int channels,
                    const BatchNormState<T>& state);

// ---- composite helpers ------------------------------------------------------------

/// Row-wise log N(x; mean, exp(logvar)) summed over columns, N x 1.
template <typename T>
Var<T> gaussian_log_density(const Var<T>& x, const Var<T>& mean, const Var<T>& logvar);

/// Row-wise KL(N(mu, exp(logvar)) || N(0, I)) summed over columns, N x 1.
template <typename T>
Var<T> kl_standard_normal(const Var<T>& mu, const Var<T>& logvar);

}  // namespace ssbi::nn
