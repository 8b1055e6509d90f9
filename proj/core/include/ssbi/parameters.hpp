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

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ssbi::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Named tensor stored as a 2D matrix: the first shape entry gives the rows,
/// the product of the rest the columns. A 1D tensor of length n is 1 x n.
template <typename T>
struct Tensor {
  std::string name;
  std::vector<int> shape;
  Matrix<T> value;
  Matrix<T> grad;
  bool trainable = true;

  std::size_t size() const { return static_cast<std::size_t>(value.size()); }
};

/// Ordered collection of tensors. Tensors are addressed by the index returned
/// from add(), which stays valid across copies.
template <typename T>
class ParameterSet {
 public:
  std::size_t add(std::string name, std::vector<int> shape, bool trainable = true);

  Tensor<T>& operator[](std::size_t id) { return tensors_[id]; }
  const Tensor<T>& operator[](std::size_t id) const { return tensors_[id]; }
  Tensor<T>& find(std::string_view name);
  const Tensor<T>& find(std::string_view name) const;

  std::size_t size() const { return tensors_.size(); }
  std::size_t scalar_count(bool trainable_only = true) const;
  void zero_grad();

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

  template <typename U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (const Tensor<T>& t : tensors_) {
      const std::size_t id = out.add(t.name, t.shape, t.trainable);
      out[id].value = t.value.template cast<U>();
    }
    return out;
  }

  /// Copies values (not gradients) from a set with identical names and shapes.
  template <typename U>
  void assign_values(const ParameterSet<U>& other) {
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
      tensors_[i].value = other[i].value.template cast<T>();
    }
  }

 private:
  std::vector<Tensor<T>> tensors_;
};

}  // namespace ssbi::nn
