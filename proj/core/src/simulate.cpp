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

#include "ssbi/simulate.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "ssbi/roughness.hpp"

namespace ssbi {

void ExperimentGeometry::validate() const {
  if (!(wavelength > 0.0) || !(incident_angle > 0.0) || !(pixel_size > 0.0) ||
      n_pixels_y == 0 || n_pixels_z == 0 || !(detector_distance > 0.0) ||
      !(beam_intensity > 0.0) || !(constant_background >= 0.0)) {
    throw std::domain_error("experiment geometry values must be positive");
  }
  const double width = pixel_mm() * static_cast<double>(n_pixels_y);
  const double height = pixel_mm() * static_cast<double>(n_pixels_z);
  if (!(specular_y > 0.0 && specular_y < width && specular_z > 0.0 && specular_z < height)) {
    throw std::domain_error("specular reflection lies outside the detector");
  }
}

double ExperimentGeometry::wavenumber() const { return 2.0 * std::numbers::pi / wavelength; }

double ExperimentGeometry::exit_angle(std::size_t row) const {
  // The direct beam hits the detector 2 alpha_i below the specular spot.
  const double z = (static_cast<double>(row) + 0.5) * pixel_mm();
  const double z_direct = specular_z - detector_distance * std::tan(2.0 * incident_angle);
  return std::atan((z - z_direct) / detector_distance) - incident_angle;
}

double ExperimentGeometry::azimuthal_angle(std::size_t col) const {
  const double y = (static_cast<double>(col) + 0.5) * pixel_mm();
  return std::atan((y - specular_y) / detector_distance);
}

std::size_t ExperimentGeometry::specular_column() const {
  return static_cast<std::size_t>(std::lround(specular_y / pixel_mm()));
}

std::size_t ExperimentGeometry::specular_row() const {
  return static_cast<std::size_t>(std::floor(specular_z / pixel_mm()));
}

ExperimentGeometry beamline_geometry() { return ExperimentGeometry{}; }

ExperimentGeometry desk_geometry() {
  ExperimentGeometry g;
  g.pixel_size = 200.0;
  g.n_pixels_y = 128;
  g.n_pixels_z = 256;
  g.specular_y = 10.8;
  return g;
}

namespace {

struct InterfaceTerm {
  double prefactor;  // beam * k^4 |d eps|^2 / (16 pi^2 sin alpha_i) * |E_i|^2
  double sigma, xi, hurst;
  std::size_t medium;  // medium above the interface
  double depth;
};

}  // namespace

DetectorImage simulate_image(const MultilayerSample& sample,
                             const ExperimentGeometry& geometry, bool noise, Rng& rng) {
  sample.validate();
  geometry.validate();

  const double k = geometry.wavenumber();
  const double alpha_i = geometry.incident_angle;
  const std::size_t n_layers = sample.layers.size();
  const FieldAmplitudes incident = parratt_amplitudes(sample, alpha_i, geometry.wavelength);

  std::vector<InterfaceTerm> terms;
  for (std::size_t j = 0; j <= n_layers; ++j) {
    double sigma, xi, hurst;
    if (j < n_layers) {
      const Layer& l = sample.layers[j];
      sigma = l.roughness;
      xi = l.lateral_correlation;
      hurst = l.hurst;
    } else {
      sigma = sample.substrate.roughness;
      xi = sample.substrate.lateral_correlation;
      hurst = sample.substrate.hurst;
    }
    if (!(sigma > 0.0)) continue;
    const Complex n_above = refractive_index(sample, j);
    const Complex n_below = refractive_index(sample, j + 1);
    const double contrast = std::norm(n_above * n_above - n_below * n_below);
    if (contrast == 0.0) continue;
    const double depth = incident.top_depth[j + 1];
    const double field_i = std::norm(incident.field_at(j, depth));
    const double k4 = k * k * k * k;
    terms.push_back({geometry.beam_intensity * k4 * contrast /
                         (16.0 * std::numbers::pi * std::numbers::pi * std::sin(alpha_i)) *
                         field_i,
                     sigma, xi, hurst, j, depth});
    // Validates hurst and xi up front.
    (void)psd_selfaffine(0.0, sigma, xi, hurst);
  }

  DetectorImage image;
  image.geometry = geometry;
  const std::size_t rows = geometry.n_pixels_z;
  const std::size_t cols = geometry.n_pixels_y;
  image.intensities.assign(rows * cols, geometry.constant_background);

  const double pix = geometry.pixel_mm();
  const double dist = geometry.detector_distance;
  const double z_direct = geometry.specular_z - dist * std::tan(2.0 * alpha_i);

  std::vector<double> sin_phi(cols), cos_phi(cols), dy2(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const double phi = geometry.azimuthal_angle(c);
    cos_phi[c] = std::cos(phi);
    sin_phi[c] = std::sin(phi);
    const double dy = (static_cast<double>(c) + 0.5) * pix - geometry.specular_y;
    dy2[c] = dy * dy;
  }

  std::vector<double> row_weight(terms.size());
  std::vector<double> coef(terms.size()), xi2(terms.size()), expo(terms.size());
  for (std::size_t t = 0; t < terms.size(); ++t) {
    coef[t] = 4.0 * std::numbers::pi * terms[t].sigma * terms[t].sigma * terms[t].hurst *
              terms[t].xi * terms[t].xi;
    xi2[t] = terms[t].xi * terms[t].xi;
    expo[t] = -(1.0 + terms[t].hurst);
  }

  for (std::size_t r = 0; r < rows; ++r) {
    const double alpha_f = geometry.exit_angle(r);
    if (!(alpha_f > 0.0) || terms.empty()) continue;
    const FieldAmplitudes exit = parratt_amplitudes(sample, alpha_f, geometry.wavelength);
    // (T_i + R_i)(T_f + R_f) at the interface expands into the four DWBA
    // amplitude terms T_iT_f, T_iR_f, R_iT_f, R_iR_f.
    for (std::size_t t = 0; t < terms.size(); ++t) {
      row_weight[t] = terms[t].prefactor * std::norm(exit.field_at(terms[t].medium, terms[t].depth));
    }
    const double cos_f = std::cos(alpha_f);
    const double cos_i = std::cos(alpha_i);
    const double dz = (static_cast<double>(r) + 0.5) * pix - z_direct;
    double* out = &image.intensities[r * cols];
    for (std::size_t c = 0; c < cols; ++c) {
      const double qx = k * (cos_f * cos_phi[c] - cos_i);
      const double qy = k * cos_f * sin_phi[c];
      const double q2 = qx * qx + qy * qy;
      const double range = std::sqrt(dist * dist + dy2[c] + dz * dz);
      const double solid_angle = pix * pix * dist / (range * range * range);
      double diffuse = 0.0;
      for (std::size_t t = 0; t < terms.size(); ++t) {
        diffuse += row_weight[t] * coef[t] * std::exp(expo[t] * std::log1p(q2 * xi2[t]));
      }
      out[c] += diffuse * solid_angle;
    }
  }

  if (noise) {
    for (double& v : image.intensities) {
      std::poisson_distribution<long long> pois(v);
      v = static_cast<double>(pois(rng));
    }
  }
  return image;
}

DetectorImage simulate_image(const MultilayerSample& sample,
                             const ExperimentGeometry& geometry) {
  Rng unused(0);
  return simulate_image(sample, geometry, false, unused);
}

}  // namespace ssbi
