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

namespace ssbi {

/// Self-affine (k-correlation) power spectral density of an interface,
///   PSD(q) = 4 pi sigma^2 h xi^2 / (1 + q^2 xi^2)^(1 + h),
/// normalized so that (1 / 2 pi) * integral_0^inf PSD(q) q dq = sigma^2.
/// Units: nm^4 for q in nm^-1 and sigma, xi in nm.
/// Throws std::domain_error unless sigma, xi > 0 and hurst in (0, 1).
double psd_selfaffine(double q_par, double sigma, double xi, double hurst);

}  // namespace ssbi
