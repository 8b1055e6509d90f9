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

#include <complex>
#include <vector>

namespace ssbi {

using Complex = std::complex<double>;

/// One film of the stack. Roughness, Hurst exponent and lateral correlation
/// describe the interface on top of this layer.
struct Layer {
  double dispersion = 0.0;           // delta
  double absorption = 0.0;           // beta
  double thickness = 1.0;            // nm
  double roughness = 0.0;            // nm, rms height
  double hurst = 0.5;
  double lateral_correlation = 10.0; // nm

  static constexpr int kParameterCount = 6;
};

/// Semi-infinite substrate. Its own interface (bottom of the last layer) is
/// smooth unless a roughness is configured.
struct Substrate {
  double dispersion = 0.0;
  double absorption = 0.0;
  double roughness = 0.0;
  double hurst = 0.5;
  double lateral_correlation = 10.0;
};

/// Ordered layer stack, ambient-adjacent layer first. Ambient is vacuum.
struct MultilayerSample {
  std::vector<Layer> layers;
  Substrate substrate;

  /// Throws std::domain_error on an empty stack or non-finite/negative values.
  void validate() const;
};

/// Silicon optical constants at the given wavelength, from tabulated
/// scattering factor f1 and mass attenuation coefficients.
Substrate silicon_substrate(double wavelength_nm);

/// sqrt(2 delta). Throws std::domain_error for negative dispersion.
double critical_angle(double dispersion);

/// Field amplitudes of a plane wave incident from the ambient at grazing
/// `angle`. Index 0 is the ambient, 1..N the layers, N+1 the substrate.
///
/// Amplitudes are referenced to the common origin at the ambient surface, so
/// the field inside medium j at depth x (positive downwards) is
///   E(x) = transmitted[j] * exp(i kz[j] x) + reflected[j] * exp(-i kz[j] x).
/// With this convention a stack without index contrast has T = 1, R = 0
/// everywhere.
struct FieldAmplitudes {
  std::vector<Complex> transmitted;
  std::vector<Complex> reflected;
  std::vector<Complex> kz;  // nm^-1, Im >= 0
  std::vector<double> top_depth;  // depth of each medium's upper interface

  Complex field_at(std::size_t medium, double depth) const;
};

/// Parratt recursion with Nevot-Croce damped Fresnel coefficients.
FieldAmplitudes parratt_amplitudes(const MultilayerSample& sample, double angle,
                                   double wavelength);

/// Refractive index n = 1 - delta + i beta of medium j (0 = ambient).
Complex refractive_index(const MultilayerSample& sample, std::size_t medium);

}  // namespace ssbi
