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
#include <utility>
#include <vector>

#include "ssbi/simulate.hpp"

namespace ssbi {

enum class IntensityTransform { kLog10p1, kIdentity };
enum class PartNormalization { kPeak, kSum };

/// Rows [z_lo, z_hi] are hidden by the beamstop; the in-plane band spans
/// 2 * lateral_halfwidth columns centred on the specular column.
struct BeamstopMask {
  std::size_t z_lo = 0;
  std::size_t z_hi = 0;
  std::size_t lateral_halfwidth = 1;

  void validate(std::size_t n_pixels_z) const;
};

struct SignalConfig {
  BeamstopMask mask;
  std::size_t crop_low = 0;   // rows discarded at the bottom of the detector
  std::size_t crop_high = 0;  // rows discarded at the top
  IntensityTransform transform = IntensityTransform::kLog10p1;
  PartNormalization normalization = PartNormalization::kPeak;

  /// Output length for a detector with `n_pixels_z` rows; independent of the
  /// image contents. Throws EmptySignalError when nothing remains.
  std::size_t signal_length(std::size_t n_pixels_z) const;
  /// Rows kept below and above the beamstop, in detector order.
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> kept_rows(
      std::size_t n_pixels_z) const;
};

/// Defaults for beamline_geometry(): a 30-pixel centre cut, beamstop rows
/// 400..425 around the specular spot and crops of 200/439 rows, giving 359
/// samples.
SignalConfig beamline_signal_config();
/// The same mask scaled to desk_geometry(): 8-column cut, 90 samples.
SignalConfig desk_signal_config();

struct InPlaneSignal {
  std::vector<double> values;
  std::size_t part_boundary = 0;  // first index of the post-beamstop part
  std::string geometry_tag;
};

/// Tabulated parasitic background, one value per detector row (missing rows
/// are zero).
struct BackgroundCurve {
  std::vector<std::pair<std::size_t, double>> points;

  double at(std::size_t row) const;
};

/// Reads "row value" pairs, one per line. Blank lines and lines starting with
/// '#' are skipped. Throws ConfigError on malformed lines.
BackgroundCurve read_background_curve(const std::filesystem::path& path);

std::string geometry_tag(const ExperimentGeometry& geometry);

/// Centre-band average of the transformed image, background-subtracted,
/// split at the beamstop, normalized per part and concatenated.
InPlaneSignal extract_inplane(const DetectorImage& image, const SignalConfig& config,
                              const BackgroundCurve* background = nullptr);

}  // namespace ssbi
