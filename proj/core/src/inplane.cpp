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

#include "ssbi/inplane.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ssbi/error.hpp"

namespace ssbi {

void BeamstopMask::validate(std::size_t n_pixels_z) const {
  if (!(z_lo < z_hi && z_hi < n_pixels_z)) {
    throw std::domain_error("beamstop mask must satisfy z_lo < z_hi < n_pixels_z");
  }
  if (lateral_halfwidth < 1) throw std::domain_error("lateral_halfwidth must be >= 1");
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> SignalConfig::kept_rows(
    std::size_t n_pixels_z) const {
  mask.validate(n_pixels_z);
  std::vector<std::size_t> below, above;
  const std::size_t top = crop_high >= n_pixels_z ? 0 : n_pixels_z - crop_high;
  for (std::size_t r = crop_low; r < std::min(mask.z_lo, top); ++r) below.push_back(r);
  for (std::size_t r = std::max(mask.z_hi + 1, crop_low); r < top; ++r) above.push_back(r);
  if (below.empty() && above.empty()) {
    throw EmptySignalError("beamstop and crops cover the whole detector");
  }
  return {std::move(below), std::move(above)};
}

std::size_t SignalConfig::signal_length(std::size_t n_pixels_z) const {
  const auto [below, above] = kept_rows(n_pixels_z);
  return below.size() + above.size();
}

SignalConfig beamline_signal_config() {
  SignalConfig c;
  c.mask = {400, 425, 15};
  c.crop_low = 200;
  c.crop_high = 439;
  return c;
}

SignalConfig desk_signal_config() {
  SignalConfig c;
  c.mask = {100, 106, 4};
  c.crop_low = 50;
  c.crop_high = 109;
  return c;
}

double BackgroundCurve::at(std::size_t row) const {
  for (const auto& [r, v] : points) {
    if (r == row) return v;
  }
  return 0.0;
}

BackgroundCurve read_background_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open background curve: " + path.string());
  BackgroundCurve curve;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long long row = -1;
    double value = 0.0;
    std::string rest;
    if (!(fields >> row >> value) || row < 0 || (fields >> rest)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected '<row> <value>'");
    }
    curve.points.emplace_back(static_cast<std::size_t>(row), value);
  }
  return curve;
}

std::string geometry_tag(const ExperimentGeometry& g) {
  std::ostringstream os;
  os << "z" << g.n_pixels_z << "_y" << g.n_pixels_y << "_px" << g.pixel_size << "um";
  return os.str();
}

namespace {

void normalize_part(std::vector<double>& v, std::size_t begin, std::size_t end,
                    PartNormalization mode) {
  if (begin == end) return;
  double scale = 0.0;
  if (mode == PartNormalization::kPeak) {
    scale = *std::max_element(v.begin() + begin, v.begin() + end);
  } else {
    for (std::size_t i = begin; i < end; ++i) scale += v[i];
  }
  if (!(scale > 0.0)) return;
  for (std::size_t i = begin; i < end; ++i) v[i] /= scale;
}

}  // namespace

InPlaneSignal extract_inplane(const DetectorImage& image, const SignalConfig& config,
                              const BackgroundCurve* background) {
  const ExperimentGeometry& g = image.geometry;
  if (image.intensities.size() != g.n_pixels_y * g.n_pixels_z) {
    throw ShapeError("image size does not match its geometry");
  }
  const auto [below, above] = config.kept_rows(g.n_pixels_z);

  const std::size_t centre = g.specular_column();
  const std::size_t hw = config.mask.lateral_halfwidth;
  if (centre < hw || centre + hw > g.n_pixels_y) {
    throw ShapeError("in-plane band extends beyond the detector");
  }

  auto row_value = [&](std::size_t row) {
    double sum = 0.0;
    for (std::size_t c = centre - hw; c < centre + hw; ++c) {
      const double v = image.at(row, c);
      sum += config.transform == IntensityTransform::kLog10p1 ? std::log10(1.0 + v) : v;
    }
    double mean = sum / static_cast<double>(2 * hw);
    if (background) mean = std::max(0.0, mean - background->at(row));
    return mean;
  };

  InPlaneSignal out;
  out.geometry_tag = geometry_tag(g);
  out.values.reserve(below.size() + above.size());
  for (std::size_t r : below) out.values.push_back(row_value(r));
  out.part_boundary = out.values.size();
  for (std::size_t r : above) out.values.push_back(row_value(r));
  normalize_part(out.values, 0, out.part_boundary, config.normalization);
  normalize_part(out.values, out.part_boundary, out.values.size(), config.normalization);
  return out;
}

}  // namespace ssbi
