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
#include <filesystem>
#include <string>
#include <vector>

#include "ssbi/param_map.hpp"
#include "ssbi/parameters.hpp"

namespace ssbi {

/// Posterior draws in unit-cube parameter space with their log densities.
struct PosteriorSampleSet {
  nn::Matrix<double> samples;     // n x d
  std::vector<double> log_probs;  // nats, one per row
  std::vector<std::string> param_names;
  std::vector<ParamRange> param_ranges;

  std::size_t size() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(samples.cols()); }
  /// Throws std::invalid_argument when empty, mis-sized or non-finite.
  void validate() const;
  /// Row with the largest log density (lowest index on ties).
  std::size_t argmax() const;
};

/// Directory with manifest.json, samples.bin (n x d) and log_probs.bin, both
/// little-endian float32.
void write_posterior(const std::filesystem::path& dir, const PosteriorSampleSet& set);
PosteriorSampleSet read_posterior(const std::filesystem::path& dir);

}  // namespace ssbi
