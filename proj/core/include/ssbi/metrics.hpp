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

#include "ssbi/abc.hpp"
#include "ssbi/dataset.hpp"
#include "ssbi/maf.hpp"
#include "ssbi/param_map.hpp"
#include "ssbi/parameters.hpp"

namespace ssbi {

/// One held-out observation: true parameters (unit cube) and its signal.
struct TestItem {
  std::vector<double> y;
  std::vector<double> zeta;
};

/// Log density an estimator assigns to `y` given `zeta`.
using LogDensityEstimator = std::function<double(std::span<const double> y, std::span<const double> zeta)>;

/// Per-item log densities and their mean. Throws std::invalid_argument on an
/// empty test set.
std::vector<double> test_log_probs(const LogDensityEstimator& estimator, std::span<const TestItem> items);
double test_log_prob(const LogDensityEstimator& estimator, std::span<const TestItem> items);

/// Test items built from dataset records.
std::vector<TestItem> test_items(const Dataset& data, std::span<const std::size_t> indices);

/// Flow density with the latent integrated out: log of the mean density over
/// `n_latent` draws of z ~ N(0, I), seeded per call sequence from `seed`.
LogDensityEstimator flow_estimator(const MafFlow<float>& flow, std::uint64_t seed, std::size_t n_latent = 16);
/// KDE over the ABC accepted set for the observation's signal. The averaged
/// form is used when config.bandwidths is non-empty.
LogDensityEstimator abc_kde_estimator(const Dataset& reference, const AbcConfig& config);

/// Mean over dimensions of |a - b| / (hi - lo). Throws std::domain_error for a
/// degenerate range and ShapeError on length mismatch.
double normalized_mae(std::span<const double> estimate, std::span<const double> reference,
                      std::span<const ParamRange> ranges);

/// W1 between two empirical 1D distributions (quantile-function integral).
double wasserstein_1d(std::vector<double> a, std::vector<double> b);
/// Mean over columns of the per-dimension W1.
double wasserstein_marginals(const nn::Matrix<double>& a, const nn::Matrix<double>& b);

/// Flow point estimate: among `n` posterior draws (each with its own latent),
/// the one with the largest density after integrating over `n_latent` shared
/// latent draws.
std::vector<double> flow_map(const MafFlow<float>& flow, std::span<const double> zeta, std::size_t n, Rng& rng,
                             std::size_t n_latent = 16);

}  // namespace ssbi
