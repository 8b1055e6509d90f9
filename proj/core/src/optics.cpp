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

#include "ssbi/optics.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ssbi {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

Complex vertical_wavevector(double k, double sin_angle, double delta, double beta) {
  // k * sqrt(n^2 - cos^2) with n^2 ~ 1 - 2 delta + 2 i beta
  Complex kz = k * std::sqrt(Complex(sin_angle * sin_angle - 2.0 * delta, 2.0 * beta));
  if (kz.imag() < 0.0) kz = -kz;
  return kz;
}

}  // namespace

void MultilayerSample::validate() const {
  if (layers.empty()) throw std::domain_error("multilayer sample has no layers");
  for (const Layer& l : layers) {
    if (!finite_nonneg(l.dispersion) || !finite_nonneg(l.absorption) ||
        !finite_nonneg(l.thickness) || !finite_nonneg(l.roughness) ||
        !std::isfinite(l.hurst) || !std::isfinite(l.lateral_correlation) ||
        l.lateral_correlation <= 0.0) {
      throw std::domain_error("layer parameters must be finite and non-negative");
    }
  }
  if (!finite_nonneg(substrate.dispersion) || !finite_nonneg(substrate.absorption) ||
      !finite_nonneg(substrate.roughness)) {
    throw std::domain_error("substrate optical constants must be finite and non-negative");
  }
}

Substrate silicon_substrate(double wavelength_nm) {
  // E[keV] = hc / lambda
  constexpr double kHcKevNm = 1.239841984;
  constexpr double kClassicalRadiusNm = 2.8179403262e-6;
  constexpr double kAvogadro = 6.02214076e23;
  constexpr double kDensity = 2.329;      // g/cm^3
  constexpr double kMolarMass = 28.0855;  // g/mol

  // Tabulated anomalous scattering factor f1 (electrons) and mass attenuation
  // mu/rho (cm^2/g) above the K edge; log-log interpolation in between.
  struct Row { double kev, f1, mu_rho; };
  static constexpr std::array<Row, 6> table{{{5.0, 14.30, 245.0},
                                             {6.0, 14.28, 147.0},
                                             {8.0, 14.26, 63.45},
                                             {10.0, 14.22, 33.89},
                                             {15.0, 14.15, 10.34},
                                             {20.0, 14.11, 4.464}}};
  const double kev = kHcKevNm / wavelength_nm;
  std::size_t i = 0;
  while (i + 2 < table.size() && kev > table[i + 1].kev) ++i;
  const Row& a = table[i];
  const Row& b = table[i + 1];
  const double t = std::log(kev / a.kev) / std::log(b.kev / a.kev);
  const double f1 = a.f1 + t * (b.f1 - a.f1);
  const double mu_rho = std::exp(std::log(a.mu_rho) + t * (std::log(b.mu_rho) - std::log(a.mu_rho)));

  const double atoms_per_nm3 = kDensity / kMolarMass * kAvogadro * 1e-21;
  Substrate s;
  s.dispersion = kClassicalRadiusNm * wavelength_nm * wavelength_nm * atoms_per_nm3 * f1 /
                 (2.0 * std::numbers::pi);
  const double mu_per_nm = mu_rho * kDensity * 1e-7;
  s.absorption = mu_per_nm * wavelength_nm / (4.0 * std::numbers::pi);
  return s;
}

double critical_angle(double dispersion) {
  if (!(dispersion >= 0.0)) throw std::domain_error("critical_angle: negative dispersion");
  return std::sqrt(2.0 * dispersion);
}

Complex refractive_index(const MultilayerSample& sample, std::size_t medium) {
  if (medium == 0) return {1.0, 0.0};
  if (medium <= sample.layers.size()) {
    const Layer& l = sample.layers[medium - 1];
    return {1.0 - l.dispersion, l.absorption};
  }
  return {1.0 - sample.substrate.dispersion, sample.substrate.absorption};
}

Complex FieldAmplitudes::field_at(std::size_t medium, double depth) const {
  const Complex phase = std::exp(Complex(0.0, 1.0) * kz[medium] * depth);
  return transmitted[medium] * phase + reflected[medium] / phase;
}

FieldAmplitudes parratt_amplitudes(const MultilayerSample& sample, double angle,
                                   double wavelength) {
  if (sample.layers.empty()) throw std::domain_error("parratt_amplitudes: empty stack");
  if (!(angle > 0.0) || !(wavelength > 0.0)) {
    throw std::domain_error("parratt_amplitudes: angle and wavelength must be positive");
  }
  const std::size_t n_layers = sample.layers.size();
  const std::size_t n_media = n_layers + 2;
  const double k = 2.0 * std::numbers::pi / wavelength;
  const double sin_a = std::sin(angle);
  const Complex I(0.0, 1.0);

  FieldAmplitudes out;
  out.kz.resize(n_media);
  out.top_depth.assign(n_media, 0.0);
  std::vector<double> thickness(n_media, 0.0);
  std::vector<double> sigma(n_media - 1, 0.0);  // interface j: media j | j+1
  out.kz[0] = vertical_wavevector(k, sin_a, 0.0, 0.0);
  for (std::size_t j = 1; j <= n_layers; ++j) {
    const Layer& l = sample.layers[j - 1];
    out.kz[j] = vertical_wavevector(k, sin_a, l.dispersion, l.absorption);
    thickness[j] = l.thickness;
    sigma[j - 1] = l.roughness;
    out.top_depth[j] = out.top_depth[j - 1] + thickness[j - 1];
  }
  out.kz[n_media - 1] = vertical_wavevector(k, sin_a, sample.substrate.dispersion,
                                            sample.substrate.absorption);
  out.top_depth[n_media - 1] = out.top_depth[n_layers] + thickness[n_layers];
  sigma[n_layers] = sample.substrate.roughness;

  std::vector<Complex> r(n_media - 1), t(n_media - 1);
  for (std::size_t j = 0; j + 1 < n_media; ++j) {
    const Complex a = out.kz[j];
    const Complex b = out.kz[j + 1];
    const double s2 = sigma[j] * sigma[j];
    r[j] = (a - b) / (a + b) * std::exp(-2.0 * a * b * s2);
    t[j] = 2.0 * a / (a + b) * std::exp(0.5 * (a - b) * (a - b) * s2);
  }

  // Upward pass: ratio R/T just above interface j (bottom of medium j) and at
  // the top of medium j+1.
  std::vector<Complex> ratio_bottom(n_media, Complex{});
  std::vector<Complex> ratio_top(n_media, Complex{});
  for (std::size_t jj = n_media - 1; jj-- > 0;) {
    const std::size_t below = jj + 1;
    ratio_top[below] = below == n_media - 1
                           ? Complex{}
                           : ratio_bottom[below] * std::exp(2.0 * I * out.kz[below] * thickness[below]);
    ratio_bottom[jj] = (r[jj] + ratio_top[below]) / (1.0 + r[jj] * ratio_top[below]);
  }
  ratio_top[0] = ratio_bottom[0];

  // Downward pass in local (top-of-medium) convention.
  std::vector<Complex> t_local(n_media), r_local(n_media);
  t_local[0] = 1.0;
  r_local[0] = ratio_top[0];
  for (std::size_t j = 0; j + 1 < n_media; ++j) {
    const Complex t_bottom = t_local[j] * std::exp(I * out.kz[j] * thickness[j]);
    t_local[j + 1] = t_bottom * t[j] / (1.0 + r[j] * ratio_top[j + 1]);
    r_local[j + 1] = ratio_top[j + 1] * t_local[j + 1];
  }

  out.transmitted.resize(n_media);
  out.reflected.resize(n_media);
  for (std::size_t j = 0; j < n_media; ++j) {
    const Complex phase = std::exp(I * out.kz[j] * out.top_depth[j]);
    out.transmitted[j] = t_local[j] / phase;
    out.reflected[j] = r_local[j] * phase;
  }
  return out;
}

}  // namespace ssbi
