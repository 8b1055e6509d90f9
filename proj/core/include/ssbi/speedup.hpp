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
#include <string>

#include "ssbi/abc.hpp"
#include "ssbi/dataset.hpp"
#include "ssbi/maf.hpp"

namespace ssbi {

struct SpeedupOptions {
  std::size_t flow_draws = 10000;
  std::size_t repetitions = 3;        // flow and reuse-mode timings
  std::size_t cold_repetitions = 1;   // cold-start runs simulate a full dataset each time
};

/// Median wall-clock seconds of the three inference paths and their ratios.
struct SpeedupReport {
  double flow_seconds = 0.0;        // posterior draws with log densities
  double abc_reuse_seconds = 0.0;   // rejection over a precomputed dataset
  double abc_cold_seconds = 0.0;    // simulation plus rejection
  double cold_over_flow = 0.0;
  double reuse_over_flow = 0.0;
  std::size_t flow_draws = 0;
  std::size_t simulations = 0;
  unsigned threads = 1;

  std::string to_json() const;
};

/// `cold` describes the simulations run for each cold-start timing (its n and
/// threads are used as given); `reuse` is the precomputed dataset.
SpeedupReport benchmark_speedup(const MafFlow<float>& flow, const AbcConfig& abc,
                                const GenerationRequest& cold, const Dataset& reuse,
                                std::span<const double> observation, const SpeedupOptions& options = {});

}  // namespace ssbi
