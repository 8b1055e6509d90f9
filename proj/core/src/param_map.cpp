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

#include "ssbi/param_map.hpp"

#include <algorithm>
#include <stdexcept>

#include "ssbi/error.hpp"

namespace ssbi {

std::vector<double> map_params_unit(std::span<const double> values,
                                    std::span<const ParamRange> ranges,
                                    MapDirection direction, std::size_t* clamp_counter) {
  if (values.size() != ranges.size()) {
    throw ShapeError("map_params_unit: value and range dimensions differ");
  }
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const ParamRange& r = ranges[i];
    if (!(r.lo < r.hi)) throw std::domain_error("map_params_unit: degenerate range");
    if (direction == MapDirection::kToUnit) {
      double v = values[i];
      if (v < r.lo || v > r.hi) {
        v = std::clamp(v, r.lo, r.hi);
        if (clamp_counter) ++*clamp_counter;
      }
      out[i] = (v - r.lo) / (r.hi - r.lo);
    } else {
      const double u = values[i];
      if (!(u >= 0.0 && u <= 1.0)) {
        throw std::domain_error("map_params_unit: unit-cube input outside [0, 1]");
      }
      out[i] = r.lo + u * (r.hi - r.lo);
    }
  }
  return out;
}

}  // namespace ssbi
