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
#include <vector>

#include "ssbi/parameters.hpp"

namespace ssbi {

struct AdamWOptions {
  double lr = 1e-3;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moments per tensor, aligned with a ParameterSet.
template <typename T>
struct OptimizerState {
  AdamWOptions options;
  std::vector<nn::Matrix<T>> first;
  std::vector<nn::Matrix<T>> second;
  std::size_t step = 0;
};

template <typename T>
OptimizerState<T> make_optimizer(const nn::ParameterSet<T>& params, const AdamWOptions& options = {});

/// One decoupled-weight-decay Adam update of every trainable tensor using the
/// gradients stored in the tensors. Throws ShapeError when the state does not
/// match the parameters.
template <typename T>
void adamw_step(nn::ParameterSet<T>& params, OptimizerState<T>& state);

}  // namespace ssbi
