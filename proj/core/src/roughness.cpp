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

#include "ssbi/roughness.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ssbi {

double psd_selfaffine(double q_par, double sigma, double xi, double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw std::domain_error("psd_selfaffine: hurst must lie in (0, 1)");
  }
  if (!(sigma > 0.0) || !(xi > 0.0)) {
    throw std::domain_error("psd_selfaffine: sigma and xi must be positive");
  }
  const double qx = q_par * xi;
  return 4.0 * std::numbers::pi * sigma * sigma * hurst * xi * xi *
         std::exp(-(1.0 + hurst) * std::log1p(qx * qx));
}

}  // namespace ssbi
