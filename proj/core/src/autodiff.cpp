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

#include "ssbi/autodiff.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ssbi/error.hpp"

namespace ssbi::nn {

namespace {

template <typename T>
void require_same_shape(const Var<T>& a, const Var<T>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

template <typename T, typename Fwd, typename Deriv>
Var<T> unary(const Var<T>& a, Fwd fwd, Deriv deriv) {
  Tape<T>& tape = a.tape();
  Matrix<T> out = a.value().unaryExpr(fwd);
  const std::size_t ia = a.id();
  return tape.record(std::move(out), {a}, [ia, deriv](Tape<T>& t, std::size_t self) {
    const Matrix<T>& x = t.value(ia);
    const Matrix<T>& y = t.value(self);
    Matrix<T>& gx = t.grad(ia);
    const Matrix<T>& gy = t.grad(self);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      gx.data()[i] += gy.data()[i] * deriv(x.data()[i], y.data()[i]);
    }
  });
}

}  // namespace

template <typename T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_nt: inner dimensions differ");
  Tape<T>& tape = a.tape();
  Matrix<T> out = a.value() * b.value().transpose();
  const std::size_t ia = a.id(), ib = b.id();
  const bool ga = tape.requires_grad(a), gb = tape.requires_grad(b);
  return tape.record(std::move(out), {a, b}, [ia, ib, ga, gb](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.grad(self);
    if (ga) t.grad(ia).noalias() += g * t.value(ib);
    if (gb) t.grad(ib).noalias() += g.transpose() * t.value(ia);
  });
}

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  Tape<T>& tape = a.tape();
  Matrix<T> out = a.value() * b.value();
  const std::size_t ia = a.id(), ib = b.id();
  const bool ga = tape.requires_grad(a), gb = tape.requires_grad(b);
  return tape.record(std::move(out), {a, b}, [ia, ib, ga, gb](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.grad(self);
    if (ga) t.grad(ia).noalias() += g * t.value(ib).transpose();
    if (gb) t.grad(ib).noalias() += t.value(ia).transpose() * g;
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a, b, "add");
  Tape<T>& tape = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  const bool ga = tape.requires_grad(a), gb = tape.requires_grad(b);
  return tape.record(a.value() + b.value(), {a, b}, [ia, ib, ga, gb](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.grad(self);
    if (ga) t.grad(ia) += g;
    if (gb) t.grad(ib) += g;
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a, b, "sub");
  Tape<T>& tape = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  const bool ga = tape.requires_grad(a), gb = tape.requires_grad(b);
  return tape.record(a.value() - b.value(), {a, b}, [ia, ib, ga, gb](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.grad(self);
    if (ga) t.grad(ia) += g;
    if (gb) t.grad(ib) -= g;
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a, b, "mul");
  Tape<T>& tape = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  const bool ga = tape.requires_grad(a), gb = tape.requires_grad(b);
  Matrix<T> out = a.value().cwiseProduct(b.value());
  return tape.record(std::move(out), {a, b}, [ia, ib, ga, gb](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.grad(self);
    if (ga) t.grad(ia) += g.cwiseProduct(t.value(ib));
    if (gb) t.grad(ib) += g.cwiseProduct(t.value(ia));
  });
}

template <typename T>
Var<T> add_row(const Var<T>& a, const Var<T>& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw ShapeError("add_row: bad row shape");
  Tape<T>& tape = a.tape();
  Matrix<T> out = a.value().rowwise() + row.value().row(0);
  const std::size_t ia = a.id(), ir = row.id();
  const bool ga = tape.requires_grad(a), gr = tape.requires_grad(row);
  return tape.record(std::move(out), {a, row}, [ia, ir, ga, gr](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.grad(self);
    if (ga) t.grad(ia) += g;
    if (gr) t.grad(ir) += g.colwise().sum();
  });
}

template <typename T>
Var<T> mul_col(const Var<T>& a, const Var<T>& col) {
  if (col.cols() != 1 || col.rows() != a.rows()) throw ShapeError("mul_col: bad column shape");
  Tape<T>& tape = a.tape();
  Matrix<T> out = a.value().array().colwise() * col.value().col(0).array();
  const std::size_t ia = a.id(), ic = col.id();
  const bool ga = tape.requires_grad(a), gc = tape.requires_grad(col);
  return tape.record(std::move(out), {a, col}, [ia, ic, ga, gc](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.grad(self);
    if (ga) t.grad(ia).array() += g.array().colwise() * t.value(ic).col(0).array();
    if (gc) t.grad(ic).col(0) += g.cwiseProduct(t.value(ia)).rowwise().sum();
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  Tape<T>& tape = a.tape();
  const std::size_t ia = a.id();
  return tape.record(a.value() * factor, {a}, [ia, factor](Tape<T>& t, std::size_t self) {
    t.grad(ia) += t.grad(self) * factor;
  });
}

template <typename T>
Var<T> add_scalar(const Var<T>& a, T offset) {
  Tape<T>& tape = a.tape();
  const std::size_t ia = a.id();
  Matrix<T> out = a.value().array() + offset;
  return tape.record(std::move(out), {a}, [ia](Tape<T>& t, std::size_t self) {
    t.grad(ia) += t.grad(self);
  });
}

template <typename T>
Var<T> hadamard_const(const Var<T>& a, const Matrix<T>& m) {
  if (a.rows() != m.rows() || a.cols() != m.cols()) throw ShapeError("hadamard_const: shape mismatch");
  Tape<T>& tape = a.tape();
  const std::size_t ia = a.id();
  return tape.record(a.value().cwiseProduct(m), {a}, [ia, m](Tape<T>& t, std::size_t self) {
    t.grad(ia) += t.grad(self).cwiseProduct(m);
  });
}

template <typename T>
Var<T> exp(const Var<T>& a) {
  return unary(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Var<T> log(const Var<T>& a) {
  return unary(a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <typename T>
Var<T> tanh(const Var<T>& a) {
  return unary(a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  return unary(a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
               [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> silu(const Var<T>& a) {
  return unary(a, [](T x) { return x / (T(1) + std::exp(-x)); },
               [](T x, T) {
                 const T s = T(1) / (T(1) + std::exp(-x));
                 return s * (T(1) + x * (T(1) - s));
               });
}

template <typename T>
Var<T> square(const Var<T>& a) {
  return unary(a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
}

template <typename T>
Var<T> clamp(const Var<T>& a, T lo, T hi) {
  return unary(a, [lo, hi](T x) { return std::min(hi, std::max(lo, x)); },
               [lo, hi](T x, T) { return (x >= lo && x <= hi) ? T(1) : T(0); });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  Tape<T>& tape = a.tape();
  Matrix<T> out(1, 1);
  out(0, 0) = a.value().sum();
  const std::size_t ia = a.id();
  return tape.record(std::move(out), {a}, [ia](Tape<T>& t, std::size_t self) {
    t.grad(ia).array() += t.grad(self)(0, 0);
  });
}

template <typename T>
Var<T> mean(const Var<T>& a) {
  return scale(sum(a), T(1) / static_cast<T>(a.value().size()));
}

template <typename T>
Var<T> row_sum(const Var<T>& a) {
  Tape<T>& tape = a.tape();
  Matrix<T> out = a.value().rowwise().sum();
  const std::size_t ia = a.id();
  return tape.record(std::move(out), {a}, [ia](Tape<T>& t, std::size_t self) {
    t.grad(ia).colwise() += t.grad(self).col(0);
  });
}

template <typename T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Tape<T>& tape = parts[0].tape();
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var<T>& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix<T> out(rows, cols);
  std::vector<std::size_t> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index c = 0;
  for (const Var<T>& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(c);
    c += p.cols();
  }
  return tape.record(std::move(out), parts, [ids, offsets](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const Eigen::Index w = t.value(ids[k]).cols();
      t.grad(ids[k]) += g.middleCols(offsets[k], w);
    }
  });
}

template <typename T>
Var<T> slice_cols(const Var<T>& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw ShapeError("slice_cols: out of range");
  Tape<T>& tape = a.tape();
  Matrix<T> out = a.value().middleCols(start, count);
  const std::size_t ia = a.id();
  return tape.record(std::move(out), {a}, [ia, start, count](Tape<T>& t, std::size_t self) {
    t.grad(ia).middleCols(start, count) += t.grad(self);
  });
}

template <typename T>
Var<T> permute_cols(const Var<T>& a, const std::vector<int>& perm) {
  if (static_cast<Eigen::Index>(perm.size()) != a.cols()) throw ShapeError("permute_cols: bad permutation");
  Tape<T>& tape = a.tape();
  const Matrix<T>& x = a.value();
  Matrix<T> out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = x.col(perm[static_cast<std::size_t>(j)]);
  const std::size_t ia = a.id();
  return tape.record(std::move(out), {a}, [ia, perm](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.grad(self);
    Matrix<T>& gx = t.grad(ia);
    for (Eigen::Index j = 0; j < g.cols(); ++j) gx.col(perm[static_cast<std::size_t>(j)]) += g.col(j);
  });
}

// ---- convolution ------------------------------------------------------------------

ConvShape conv_shape(int in_channels, int out_channels, int in_h, int in_w, int kernel,
                     int stride, int pad) {
  ConvShape s{in_channels, out_channels, in_h, in_w, 0, 0, kernel, stride, pad};
  s.out_h = (in_h + 2 * pad - kernel) / stride + 1;
  s.out_w = (in_w + 2 * pad - kernel) / stride + 1;
  if (s.out_h <= 0 || s.out_w <= 0) throw ShapeError("conv_shape: input too small");
  return s;
}

ConvShape conv_transpose_shape(int in_channels, int out_channels, int in_h, int in_w,
                               int kernel, int stride, int pad, int output_padding) {
  ConvShape s{in_channels, out_channels, in_h, in_w, 0, 0, kernel, stride, pad};
  s.out_h = (in_h - 1) * stride - 2 * pad + kernel + output_padding;
  s.out_w = (in_w - 1) * stride - 2 * pad + kernel + output_padding;
  if (s.out_h <= 0 || s.out_w <= 0) throw ShapeError("conv_transpose_shape: bad geometry");
  return s;
}

namespace {

// Column matrix (C * k * k) x (out_h * out_w) for one image of size C x H x W.
template <typename T>
void im2col(const T* img, int channels, int h, int w, int kernel, int stride, int pad,
            int out_h, int out_w, Matrix<T>& cols) {
  cols.resize(static_cast<Eigen::Index>(channels) * kernel * kernel,
              static_cast<Eigen::Index>(out_h) * out_w);
  for (int c = 0; c < channels; ++c) {
    for (int ki = 0; ki < kernel; ++ki) {
      for (int kj = 0; kj < kernel; ++kj) {
        T* dst = cols.row((c * kernel + ki) * kernel + kj).data();
        for (int oh = 0; oh < out_h; ++oh) {
          const int ih = oh * stride - pad + ki;
          for (int ow = 0; ow < out_w; ++ow) {
            const int iw = ow * stride - pad + kj;
            dst[oh * out_w + ow] = (ih >= 0 && ih < h && iw >= 0 && iw < w)
                                       ? img[(c * h + ih) * w + iw]
                                       : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const Matrix<T>& cols, int channels, int h, int w, int kernel, int stride, int pad,
            int out_h, int out_w, T* img) {
  for (int c = 0; c < channels; ++c) {
    for (int ki = 0; ki < kernel; ++ki) {
      for (int kj = 0; kj < kernel; ++kj) {
        const T* src = cols.row((c * kernel + ki) * kernel + kj).data();
        for (int oh = 0; oh < out_h; ++oh) {
          const int ih = oh * stride - pad + ki;
          if (ih < 0 || ih >= h) continue;
          for (int ow = 0; ow < out_w; ++ow) {
            const int iw = ow * stride - pad + kj;
            if (iw < 0 || iw >= w) continue;
            img[(c * h + ih) * w + iw] += src[oh * out_w + ow];
          }
        }
      }
    }
  }
}

template <typename T>
using RowMap = Eigen::Map<Matrix<T>>;
template <typename T>
using ConstRowMap = Eigen::Map<const Matrix<T>>;

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, const ConvShape& s) {
  const Eigen::Index in_size = static_cast<Eigen::Index>(s.in_channels) * s.in_h * s.in_w;
  const Eigen::Index out_hw = static_cast<Eigen::Index>(s.out_h) * s.out_w;
  if (x.cols() != in_size) throw ShapeError("conv2d: input size does not match shape");
  if (weight.rows() != s.out_channels || weight.cols() != s.in_channels * s.kernel * s.kernel) {
    throw ShapeError("conv2d: weight shape mismatch");
  }
  if (bias.rows() != 1 || bias.cols() != s.out_channels) throw ShapeError("conv2d: bias shape mismatch");
  Tape<T>& tape = x.tape();
  const Matrix<T>& xv = x.value();
  const Matrix<T>& wv = weight.value();
  const Matrix<T>& bv = bias.value();
  const Eigen::Index n = xv.rows();
  Matrix<T> out(n, s.out_channels * out_hw);
  Matrix<T> cols;
  for (Eigen::Index i = 0; i < n; ++i) {
    im2col(xv.row(i).data(), s.in_channels, s.in_h, s.in_w, s.kernel, s.stride, s.pad, s.out_h,
           s.out_w, cols);
    RowMap<T> o(out.row(i).data(), s.out_channels, out_hw);
    o.noalias() = wv * cols;
    o.colwise() += bv.row(0).transpose();
  }
  const std::size_t ix = x.id(), iw = weight.id(), ib = bias.id();
  const bool gx = tape.requires_grad(x), gw = tape.requires_grad(weight), gb = tape.requires_grad(bias);
  return tape.record(std::move(out), {x, weight, bias},
                     [ix, iw, ib, gx, gw, gb, s, out_hw](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.grad(self);
    const Matrix<T>& xv = t.value(ix);
    const Matrix<T>& wv = t.value(iw);
    Matrix<T> cols, dcols;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      ConstRowMap<T> go(g.row(i).data(), s.out_channels, out_hw);
      if (gb) t.grad(ib).row(0) += go.rowwise().sum().transpose();
      if (gw) {
        im2col(xv.row(i).data(), s.in_channels, s.in_h, s.in_w, s.kernel, s.stride, s.pad,
               s.out_h, s.out_w, cols);
        t.grad(iw).noalias() += go * cols.transpose();
      }
      if (gx) {
        dcols.noalias() = wv.transpose() * go;
        col2im(dcols, s.in_channels, s.in_h, s.in_w, s.kernel, s.stride, s.pad, s.out_h, s.out_w,
               t.grad(ix).row(i).data());
      }
    }
  });
}

template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias,
                        const ConvShape& s) {
  const Eigen::Index in_hw = static_cast<Eigen::Index>(s.in_h) * s.in_w;
  const Eigen::Index out_hw = static_cast<Eigen::Index>(s.out_h) * s.out_w;
  if (x.cols() != s.in_channels * in_hw) throw ShapeError("conv_transpose2d: input size mismatch");
  if (weight.rows() != s.in_channels || weight.cols() != s.out_channels * s.kernel * s.kernel) {
    throw ShapeError("conv_transpose2d: weight shape mismatch");
  }
  if (bias.rows() != 1 || bias.cols() != s.out_channels) {
    throw ShapeError("conv_transpose2d: bias shape mismatch");
  }
  // The adjoint of a convolution mapping the (out_h, out_w) grid onto (in_h, in_w).
  const int fh = (s.out_h + 2 * s.pad - s.kernel) / s.stride + 1;
  const int fw = (s.out_w + 2 * s.pad - s.kernel) / s.stride + 1;
  if (fh != s.in_h || fw != s.in_w) throw ShapeError("conv_transpose2d: inconsistent geometry");

  Tape<T>& tape = x.tape();
  const Matrix<T>& xv = x.value();
  const Matrix<T>& wv = weight.value();
  const Matrix<T>& bv = bias.value();
  const Eigen::Index n = xv.rows();
  Matrix<T> out = Matrix<T>::Zero(n, s.out_channels * out_hw);
  Matrix<T> cols;
  for (Eigen::Index i = 0; i < n; ++i) {
    ConstRowMap<T> xi(xv.row(i).data(), s.in_channels, in_hw);
    cols.noalias() = wv.transpose() * xi;
    col2im(cols, s.out_channels, s.out_h, s.out_w, s.kernel, s.stride, s.pad, s.in_h, s.in_w,
           out.row(i).data());
    RowMap<T> o(out.row(i).data(), s.out_channels, out_hw);
    o.colwise() += bv.row(0).transpose();
  }
  const std::size_t ix = x.id(), iw = weight.id(), ib = bias.id();
  const bool gx = tape.requires_grad(x), gw = tape.requires_grad(weight), gb = tape.requires_grad(bias);
  return tape.record(std::move(out), {x, weight, bias},
                     [ix, iw, ib, gx, gw, gb, s, in_hw, out_hw](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.grad(self);
    const Matrix<T>& xv = t.value(ix);
    const Matrix<T>& wv = t.value(iw);
    Matrix<T> gcols;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      ConstRowMap<T> go(g.row(i).data(), s.out_channels, out_hw);
      if (gb) t.grad(ib).row(0) += go.rowwise().sum().transpose();
      if (!gw && !gx) continue;
      im2col(g.row(i).data(), s.out_channels, s.out_h, s.out_w, s.kernel, s.stride, s.pad, s.in_h,
             s.in_w, gcols);
      if (gw) {
        ConstRowMap<T> xi(xv.row(i).data(), s.in_channels, in_hw);
        t.grad(iw).noalias() += xi * gcols.transpose();
      }
      if (gx) {
        RowMap<T> dx(t.grad(ix).row(i).data(), s.in_channels, in_hw);
        dx.noalias() += wv * gcols;
      }
    }
  });
}

template <typename T>
Var<T> batch_norm2d(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, int channels,
                    const BatchNormState<T>& state) {
  if (x.cols() % channels != 0) throw ShapeError("batch_norm2d: columns not divisible by channels");
  if (gamma.cols() != channels || beta.cols() != channels) throw ShapeError("batch_norm2d: bad affine shape");
  Tape<T>& tape = x.tape();
  const Matrix<T>& xv = x.value();
  const Eigen::Index n = xv.rows();
  const Eigen::Index hw = xv.cols() / channels;
  const T count = static_cast<T>(n * hw);

  Matrix<T> mu(1, channels), inv_std(1, channels);
  for (int c = 0; c < channels; ++c) {
    if (state.training) {
      const auto block = xv.middleCols(c * hw, hw);
      const T m = block.sum() / count;
      const T var = (block.array() - m).square().sum() / count;
      mu(0, c) = m;
      inv_std(0, c) = T(1) / std::sqrt(var + state.eps);
      if (state.running_mean && state.running_var) {
        const T unbiased = count > 1 ? var * count / (count - 1) : var;
        (*state.running_mean)(0, c) = (T(1) - state.momentum) * (*state.running_mean)(0, c) + state.momentum * m;
        (*state.running_var)(0, c) = (T(1) - state.momentum) * (*state.running_var)(0, c) + state.momentum * unbiased;
      }
    } else {
      mu(0, c) = (*state.running_mean)(0, c);
      inv_std(0, c) = T(1) / std::sqrt((*state.running_var)(0, c) + state.eps);
    }
  }
  Matrix<T> xhat(n, xv.cols());
  Matrix<T> out(n, xv.cols());
  const Matrix<T>& gv = gamma.value();
  const Matrix<T>& bv = beta.value();
  for (int c = 0; c < channels; ++c) {
    xhat.middleCols(c * hw, hw) = (xv.middleCols(c * hw, hw).array() - mu(0, c)) * inv_std(0, c);
    out.middleCols(c * hw, hw) = xhat.middleCols(c * hw, hw).array() * gv(0, c) + bv(0, c);
  }
  const std::size_t ix = x.id(), ig = gamma.id(), ib = beta.id();
  const bool gx = tape.requires_grad(x), gg = tape.requires_grad(gamma), gb = tape.requires_grad(beta);
  const bool training = state.training;
  return tape.record(std::move(out), {x, gamma, beta},
                     [ix, ig, ib, gx, gg, gb, channels, hw, count, training, inv_std,
                      xhat = std::move(xhat)](Tape<T>& t, std::size_t self) {
    const Matrix<T>& g = t.grad(self);
    const Matrix<T>& gv = t.value(ig);
    for (int c = 0; c < channels; ++c) {
      const auto gc = g.middleCols(c * hw, hw);
      const auto xc = xhat.middleCols(c * hw, hw);
      const T sum_g = gc.sum();
      const T sum_gx = gc.cwiseProduct(xc).sum();
      if (gg) t.grad(ig)(0, c) += sum_gx;
      if (gb) t.grad(ib)(0, c) += sum_g;
      if (gx) {
        auto dx = t.grad(ix).middleCols(c * hw, hw);
        const T k = gv(0, c) * inv_std(0, c);
        if (training) {
          dx.array() += k * (gc.array() - sum_g / count - xc.array() * (sum_gx / count));
        } else {
          dx.array() += k * gc.array();
        }
      }
    }
  });
}

template <typename T>
Var<T> gaussian_log_density(const Var<T>& x, const Var<T>& mean, const Var<T>& logvar) {
  const T log2pi = static_cast<T>(std::log(2.0 * std::numbers::pi));
  const Var<T> diff2 = square(sub(x, mean));
  const Var<T> mahal = mul(diff2, exp(scale(logvar, T(-1))));
  const Var<T> per_dim = add(add_scalar(logvar, log2pi), mahal);
  return scale(row_sum(per_dim), T(-0.5));
}

template <typename T>
Var<T> kl_standard_normal(const Var<T>& mu, const Var<T>& logvar) {
  // 0.5 (mu^2 + sigma^2 - 1 - log sigma^2)
  const Var<T> terms = sub(add(square(mu), exp(logvar)), add_scalar(logvar, T(1)));
  return scale(row_sum(terms), T(0.5));
}

#define SSBI_INSTANTIATE_OPS(T)                                                             \
  template Var<T> matmul_nt(const Var<T>&, const Var<T>&);                                  \
  template Var<T> matmul(const Var<T>&, const Var<T>&);                                     \
  template Var<T> add(const Var<T>&, const Var<T>&);                                        \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                        \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                        \
  template Var<T> add_row(const Var<T>&, const Var<T>&);                                    \
  template Var<T> mul_col(const Var<T>&, const Var<T>&);                                    \
  template Var<T> scale(const Var<T>&, T);                                                  \
  template Var<T> add_scalar(const Var<T>&, T);                                             \
  template Var<T> hadamard_const(const Var<T>&, const Matrix<T>&);                          \
  template Var<T> exp(const Var<T>&);                                                       \
  template Var<T> log(const Var<T>&);                                                       \
  template Var<T> tanh(const Var<T>&);                                                      \
  template Var<T> sigmoid(const Var<T>&);                                                   \
  template Var<T> silu(const Var<T>&);                                                      \
  template Var<T> square(const Var<T>&);                                                    \
  template Var<T> clamp(const Var<T>&, T, T);                                               \
  template Var<T> sum(const Var<T>&);                                                       \
  template Var<T> mean(const Var<T>&);                                                      \
  template Var<T> row_sum(const Var<T>&);                                                   \
  template Var<T> concat_cols(std::span<const Var<T>>);                                     \
  template Var<T> slice_cols(const Var<T>&, Eigen::Index, Eigen::Index);                    \
  template Var<T> permute_cols(const Var<T>&, const std::vector<int>&);                     \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, const ConvShape&);    \
  template Var<T> conv_transpose2d(const Var<T>&, const Var<T>&, const Var<T>&,             \
                                   const ConvShape&);                                       \
  template Var<T> batch_norm2d(const Var<T>&, const Var<T>&, const Var<T>&, int,            \
                               const BatchNormState<T>&);                                   \
  template Var<T> gaussian_log_density(const Var<T>&, const Var<T>&, const Var<T>&);        \
  template Var<T> kl_standard_normal(const Var<T>&, const Var<T>&);

SSBI_INSTANTIATE_OPS(float)
SSBI_INSTANTIATE_OPS(double)

}  // namespace ssbi::nn
