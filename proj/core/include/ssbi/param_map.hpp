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

namespace ssbi {

struct ParamRange {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
};

enum class MapDirection { kToUnit, kFromUnit };

/// Per-dimension affine map between physical ranges and [0, 1]. Values outside
/// their range are clamped in the to-unit direction and counted in
/// `clamp_counter` when provided. Throws std::domain_error for lo >= hi and for
/// from-unit inputs outside [0, 1]; ShapeError on length mismatch.
std::vector<double> map_params_unit(std::span<const double> values,
                                    std::span<const ParamRange> ranges,
                                    MapDirection direction,
                                    std::size_t* clamp_counter = nullptr);

}  // namespace ssbi
