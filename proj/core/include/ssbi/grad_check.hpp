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

#include "ssbi/parameters.hpp"
#include "ssbi/rng.hpp"

namespace ssbi {

/// Loss of the current parameter values. With `with_grad` set it must also
/// accumulate the analytic gradient into each tensor's grad.
using DifferentiableLoss = std::function<double(nn::ParameterSet<double>& params, bool with_grad)>;

/// Gradients with magnitude below this are compared in absolute terms.
inline constexpr double kGradientFloor = 1e-4;

/// Compares analytic gradients with central differences (step 1e-5 scaled by
/// max(1, |value|)) at `probes` trainable coordinates drawn uniformly from
/// `rng`. Returns the largest |analytic - numeric| / max(|analytic|,
/// |numeric|, kGradientFloor). Parameter values are left unchanged.
double grad_check(const DifferentiableLoss& loss, nn::ParameterSet<double>& params,
                  std::size_t probes, Rng& rng);

}  // namespace ssbi
