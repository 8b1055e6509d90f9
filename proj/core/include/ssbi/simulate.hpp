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
#include <vector>

#include "ssbi/optics.hpp"
#include "ssbi/rng.hpp"

namespace ssbi {

/// Detector and beam configuration. The detector plane is perpendicular to
/// the direct beam; detector coordinates (mm) start at the lower-left corner
/// and pixel rows run along z (vertical), columns along y (lateral).
struct ExperimentGeometry {
  double wavelength = 0.14073;                 // nm
  double incident_angle = 0.64 * 3.14159265358979323846 / 180.0;  // rad
  double pixel_size = 50.0;                    // um
  std::size_t n_pixels_y = 512;
  std::size_t n_pixels_z = 1024;
  double detector_distance = 1277.0;           // mm
  double specular_y = 10.75;                   // mm
  double specular_z = 20.65;                   // mm
  double beam_intensity = 1e13;
  double constant_background = 60.0;

  void validate() const;

  double pixel_mm() const { return pixel_size * 1e-3; }
  double wavenumber() const;                   // 2 pi / wavelength
  /// Exit angle of pixel row `row` measured from the sample surface.
  double exit_angle(std::size_t row) const;
  /// In-plane exit angle of pixel column `col` measured from the incidence plane.
  double azimuthal_angle(std::size_t col) const;
  /// Column index containing (or nearest to) the specular reflection.
  std::size_t specular_column() const;
  std::size_t specular_row() const;
};

/// Full-size detector from the beamline setup (1024 x 512 pixels of 50 um).
ExperimentGeometry beamline_geometry();
/// Same optics on a 256 x 128 grid of 200 um pixels, with the specular column
/// on a pixel boundary.
ExperimentGeometry desk_geometry();

struct DetectorImage {
  std::vector<double> intensities;  // row-major, n_pixels_z rows x n_pixels_y columns
  ExperimentGeometry geometry;

  std::size_t rows() const { return geometry.n_pixels_z; }
  std::size_t cols() const { return geometry.n_pixels_y; }
  double& at(std::size_t row, std::size_t col) { return intensities[row * cols() + col]; }
  double at(std::size_t row, std::size_t col) const { return intensities[row * cols() + col]; }
};

/// First-order DWBA diffuse scattering from every rough interface, summed
/// incoherently, scaled by the beam intensity and the pixel solid angle, plus
/// the constant background. With `noise` set, each pixel is replaced by a
/// Poisson draw whose mean is the noiseless value.
DetectorImage simulate_image(const MultilayerSample& sample,
                             const ExperimentGeometry& geometry, bool noise, Rng& rng);

/// Noiseless convenience overload.
DetectorImage simulate_image(const MultilayerSample& sample,
                             const ExperimentGeometry& geometry);

}  // namespace ssbi
