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

#include "ssbi/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace ssbi {

double grad_check(const DifferentiableLoss& loss, nn::ParameterSet<double>& params,
                  std::size_t probes, Rng& rng) {
  params.zero_grad();
  loss(params, true);
  std::vector<nn::Matrix<double>> analytic;
  std::vector<std::size_t> tensor_of;  // trainable scalar -> tensor index
  std::vector<Eigen::Index> offset_of;
  for (std::size_t k = 0; k < params.size(); ++k) {
    analytic.push_back(params[k].grad);
    if (!params[k].trainable) continue;
    for (Eigen::Index i = 0; i < params[k].value.size(); ++i) {
      tensor_of.push_back(k);
      offset_of.push_back(i);
    }
  }
  if (tensor_of.empty()) throw std::invalid_argument("grad_check: no trainable parameters");

  std::uniform_int_distribution<std::size_t> pick(0, tensor_of.size() - 1);
  double worst = 0.0;
  for (std::size_t p = 0; p < probes; ++p) {
    const std::size_t s = pick(rng);
    double& value = params[tensor_of[s]].value.data()[offset_of[s]];
    const double original = value;
    const double h = 1e-5 * std::max(1.0, std::abs(original));
    value = original + h;
    const double up = loss(params, false);
    value = original - h;
    const double down = loss(params, false);
    value = original;
    const double numeric = (up - down) / (2.0 * h);
    const double exact = analytic[tensor_of[s]].data()[offset_of[s]];
    const double denom = std::max({std::abs(exact), std::abs(numeric), kGradientFloor});
    worst = std::max(worst, std::abs(exact - numeric) / denom);
  }
  return worst;
}

}  // namespace ssbi
