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

#include "ssbi/adamw.hpp"

#include <cmath>

#include "ssbi/error.hpp"

namespace ssbi {

template <typename T>
OptimizerState<T> make_optimizer(const nn::ParameterSet<T>& params, const AdamWOptions& options) {
  OptimizerState<T> state;
  state.options = options;
  for (const auto& t : params) {
    state.first.push_back(nn::Matrix<T>::Zero(t.value.rows(), t.value.cols()));
    state.second.push_back(nn::Matrix<T>::Zero(t.value.rows(), t.value.cols()));
  }
  return state;
}

template <typename T>
void adamw_step(nn::ParameterSet<T>& params, OptimizerState<T>& state) {
  if (state.first.size() != params.size() || state.second.size() != params.size()) {
    throw ShapeError("optimizer state does not match the parameter set");
  }
  const AdamWOptions& o = state.options;
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    nn::Tensor<T>& t = params[k];
    if (!t.trainable) continue;
    nn::Matrix<T>& m = state.first[k];
    nn::Matrix<T>& v = state.second[k];
    if (m.rows() != t.value.rows() || m.cols() != t.value.cols() || t.grad.rows() != t.value.rows() ||
        t.grad.cols() != t.value.cols()) {
      throw ShapeError("optimizer state or gradient shape differs for " + t.name);
    }
    for (Eigen::Index i = 0; i < t.value.size(); ++i) {
      const double g = t.grad.data()[i];
      const double mi = o.beta1 * m.data()[i] + (1.0 - o.beta1) * g;
      const double vi = o.beta2 * v.data()[i] + (1.0 - o.beta2) * g * g;
      m.data()[i] = static_cast<T>(mi);
      v.data()[i] = static_cast<T>(vi);
      const double theta = t.value.data()[i];
      const double update = o.lr * (mi / c1) / (std::sqrt(vi / c2) + o.eps) + o.lr * o.weight_decay * theta;
      t.value.data()[i] = static_cast<T>(theta - update);
    }
  }
}

template OptimizerState<float> make_optimizer(const nn::ParameterSet<float>&, const AdamWOptions&);
template OptimizerState<double> make_optimizer(const nn::ParameterSet<double>&, const AdamWOptions&);
template void adamw_step(nn::ParameterSet<float>&, OptimizerState<float>&);
template void adamw_step(nn::ParameterSet<double>&, OptimizerState<double>&);

}  // namespace ssbi
