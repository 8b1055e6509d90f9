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

#include "ssbi/parameters.hpp"

#include <numeric>
#include <stdexcept>

namespace ssbi::nn {

template <typename T>
std::size_t ParameterSet<T>::add(std::string name, std::vector<int> shape, bool trainable) {
  for (const Tensor<T>& t : tensors_) {
    if (t.name == name) throw std::invalid_argument("duplicate tensor name: " + name);
  }
  if (shape.empty()) throw std::invalid_argument("tensor needs a shape: " + name);
  Eigen::Index rows = 1;
  Eigen::Index cols = shape[0];
  if (shape.size() > 1) {
    rows = shape[0];
    cols = std::accumulate(shape.begin() + 1, shape.end(), Eigen::Index{1},
                           [](Eigen::Index a, int b) { return a * b; });
  }
  Tensor<T> t;
  t.name = std::move(name);
  t.shape = std::move(shape);
  t.value = Matrix<T>::Zero(rows, cols);
  t.grad = Matrix<T>::Zero(rows, cols);
  t.trainable = trainable;
  tensors_.push_back(std::move(t));
  return tensors_.size() - 1;
}

template <typename T>
Tensor<T>& ParameterSet<T>::find(std::string_view name) {
  for (Tensor<T>& t : tensors_) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("no tensor named " + std::string(name));
}

template <typename T>
const Tensor<T>& ParameterSet<T>::find(std::string_view name) const {
  return const_cast<ParameterSet*>(this)->find(name);
}

template <typename T>
std::size_t ParameterSet<T>::scalar_count(bool trainable_only) const {
  std::size_t n = 0;
  for (const Tensor<T>& t : tensors_) {
    if (!trainable_only || t.trainable) n += t.size();
  }
  return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (Tensor<T>& t : tensors_) t.grad.setZero();
}

template class ParameterSet<float>;
template class ParameterSet<double>;

}  // namespace ssbi::nn
