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
#include <span>
#include <vector>

#include "ssbi/dataset.hpp"
#include "ssbi/parameters.hpp"
#include "ssbi/posterior.hpp"

namespace ssbi {

struct AbcConfig {
  double acceptance_rate = 0.002;
  double bandwidth = 0.2;              // KDE bandwidth in unit-cube space
  std::vector<double> bandwidths;      // optional list for averaged log densities
  unsigned threads = 1;
  void validate() const;
};

/// ceil(rate * n), at least 1 and at most n.
std::size_t abc_accept_count(std::size_t n, double rate);

/// Euclidean distances from `observed` to each of the n rows of `signals`
/// (n x len, row-major).
std::vector<double> signal_distances(std::span<const double> observed, std::span<const float> signals,
                                     std::size_t n, unsigned threads = 1);

/// Indices of the abc_accept_count(n) closest rows, ordered by (distance, index).
std::vector<std::size_t> abc_accept(std::span<const double> observed, std::span<const float> signals,
                                    std::size_t n, const AbcConfig& config);

/// Rejection ABC against a precomputed dataset. Accepted parameters are
/// returned in the unit cube; each carries its KDE log density under the
/// accepted set. Throws std::invalid_argument on an empty dataset and
/// ShapeError on a signal-length mismatch.
PosteriorSampleSet abc_posterior(std::span<const double> observed, const Dataset& data,
                                 const AbcConfig& config);

/// log of (1/n) sum_i prod_j N(query_j; samples_ij, bandwidth^2).
double kde_log_prob(const nn::Matrix<double>& samples, double bandwidth, std::span<const double> query);

/// Mean of kde_log_prob over several bandwidths.
double kde_log_prob_averaged(const nn::Matrix<double>& samples, std::span<const double> bandwidths,
                             std::span<const double> query);

/// Sample with the largest KDE log density under the whole set (lowest index
/// on ties).
std::size_t kde_map_index(const nn::Matrix<double>& samples, double bandwidth);
std::vector<double> kde_map(const nn::Matrix<double>& samples, double bandwidth);

}  // namespace ssbi
