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
#include <span>
#include <vector>

#include "ssbi/maf.hpp"
#include "ssbi/parameters.hpp"
#include "ssbi/rng.hpp"

namespace ssbi {

/// n posterior draws (n x d, unit cube) for an observed signal.
using PosteriorSampler = std::function<nn::Matrix<double>(std::span<const double> zeta, std::size_t n, Rng& rng)>;
/// Signal simulated from unit-cube parameters.
using ForwardPipeline = std::function<std::vector<double>(std::span<const double> y, Rng& rng)>;

struct SbcResult {
  std::vector<std::vector<std::size_t>> ranks;  // [dimension][trial], each in [0, n_draws]
  std::vector<double> p_values;                 // KS uniformity per dimension
  std::size_t n_draws = 0;
};

/// Simulation-based calibration under the uniform unit-cube prior: draw a
/// truth, simulate its signal, draw posterior samples and record the rank of
/// the truth among them per dimension. Ranks are tested for uniformity with
/// KS on (rank + 0.5) / (n_draws + 1). Requires n_trials >= 100.
SbcResult sbc_calibration(const PosteriorSampler& sampler, const ForwardPipeline& pipeline,
                          std::size_t dimension, std::size_t n_trials, std::size_t n_draws, Rng& rng);

/// Flow posterior with a fresh z ~ N(0, I) per draw; refuses an untrained model.
SbcResult sbc_calibration(const MafFlow<float>& flow, const ForwardPipeline& pipeline,
                          std::size_t n_trials, std::size_t n_draws, Rng& rng);

}  // namespace ssbi
