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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "ssbi/error.hpp"
#include "ssbi/inplane.hpp"
#include "ssbi/param_map.hpp"
#include "ssbi/simulate.hpp"

namespace ssbi {
namespace {

DetectorImage flat_image(const ExperimentGeometry& g, double value) {
  DetectorImage img;
  img.geometry = g;
  img.intensities.assign(g.n_pixels_y * g.n_pixels_z, value);
  return img;
}

TEST(ExtractInplane, BeamlineGeometryGives359) {
  const ExperimentGeometry g = beamline_geometry();
  const SignalConfig c = beamline_signal_config();
  EXPECT_EQ(c.signal_length(g.n_pixels_z), 359u);
  EXPECT_EQ(c.mask.lateral_halfwidth * 2, 30u);
  const InPlaneSignal s = extract_inplane(flat_image(g, 5.0), c);
  EXPECT_EQ(s.values.size(), 359u);
}

TEST(ExtractInplane, DeskGeometryLength) {
  const ExperimentGeometry g = desk_geometry();
  EXPECT_EQ(desk_signal_config().signal_length(g.n_pixels_z), 90u);
}

TEST(ExtractInplane, FlatImageIsAllOnes) {
  const ExperimentGeometry g = desk_geometry();
  const InPlaneSignal s = extract_inplane(flat_image(g, 42.0), desk_signal_config());
  for (double v : s.values) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_GT(s.part_boundary, 0u);
  EXPECT_LT(s.part_boundary, s.values.size());
}

TEST(ExtractInplane, SingleBrightPixelPerPartMatchesScalarRecomputation) {
  const ExperimentGeometry g = desk_geometry();
  const SignalConfig c = desk_signal_config();
  DetectorImage img = flat_image(g, 60.0);
  const std::size_t centre = g.specular_column();
  const std::size_t hw = c.mask.lateral_halfwidth;
  const std::size_t bright_low = c.crop_low + 11;      // below the beamstop
  const std::size_t bright_high = c.mask.z_hi + 5;     // above it
  img.at(bright_low, centre - 2) = 5000.0;
  img.at(bright_high, centre + 1) = 900.0;
  const InPlaneSignal s = extract_inplane(img, c);

  // Scalar recomputation: the kept rows in detector order, band mean of
  // log10(1 + I), each part divided by its own peak.
  std::vector<std::size_t> low_rows, high_rows;
  for (std::size_t r = c.crop_low; r < c.mask.z_lo; ++r) low_rows.push_back(r);
  for (std::size_t r = c.mask.z_hi + 1; r < g.n_pixels_z - c.crop_high; ++r) high_rows.push_back(r);
  ASSERT_EQ(s.values.size(), low_rows.size() + high_rows.size());
  ASSERT_EQ(s.part_boundary, low_rows.size());
  const double width = static_cast<double>(2 * hw);
  const double base = std::log10(61.0);
  const double peak_low = ((width - 1.0) * base + std::log10(5001.0)) / width;
  const double peak_high = ((width - 1.0) * base + std::log10(901.0)) / width;
  for (std::size_t k = 0; k < low_rows.size(); ++k) {
    const double want = low_rows[k] == bright_low ? 1.0 : base / peak_low;
    EXPECT_NEAR(s.values[k], want, 1e-12);
  }
  for (std::size_t k = 0; k < high_rows.size(); ++k) {
    const double want = high_rows[k] == bright_high ? 1.0 : base / peak_high;
    EXPECT_NEAR(s.values[low_rows.size() + k], want, 1e-12);
  }
}

TEST(ExtractInplane, ArgmaxInvariantUnderScaling) {
  const ExperimentGeometry g = desk_geometry();
  const SignalConfig c = desk_signal_config();
  Rng rng = make_stream(9, 0);
  std::uniform_real_distribution<double> u(1.0, 1e4);
  DetectorImage img = flat_image(g, 0.0);
  for (double& v : img.intensities) v = u(rng);
  const InPlaneSignal a = extract_inplane(img, c);
  for (double& v : img.intensities) v *= 37.0;
  const InPlaneSignal b = extract_inplane(img, c);
  auto argmax = [](const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    return std::max_element(v.begin() + static_cast<long>(lo), v.begin() + static_cast<long>(hi)) - v.begin();
  };
  EXPECT_EQ(argmax(a.values, 0, a.part_boundary), argmax(b.values, 0, b.part_boundary));
  EXPECT_EQ(argmax(a.values, a.part_boundary, a.values.size()),
            argmax(b.values, b.part_boundary, b.values.size()));
}

TEST(ExtractInplane, ZeroImageStaysFinite) {
  const ExperimentGeometry g = desk_geometry();
  const InPlaneSignal s = extract_inplane(flat_image(g, 0.0), desk_signal_config());
  EXPECT_EQ(s.values.size(), 90u);
  for (double v : s.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(ExtractInplane, BackgroundSubtractedAndClamped) {
  const ExperimentGeometry g = desk_geometry();
  const SignalConfig c = desk_signal_config();
  DetectorImage img = flat_image(g, 99.0);  // log10(100) = 2 in every row
  BackgroundCurve bg;
  bg.points = {{c.crop_low, 1.5}, {c.crop_low + 1, 3.0}};
  const InPlaneSignal s = extract_inplane(img, c, &bg);
  // Row crop_low keeps 0.5, the next is clamped to 0, the rest keep 2.
  EXPECT_NEAR(s.values[0], 0.25, 1e-12);
  EXPECT_EQ(s.values[1], 0.0);
  EXPECT_NEAR(s.values[2], 1.0, 1e-12);
}

TEST(ExtractInplane, BandCoveringDetectorIsEmpty) {
  SignalConfig c;
  c.mask = {0, 255, 4};
  EXPECT_THROW(c.signal_length(256), EmptySignalError);
}

TEST(BackgroundCurve, ParsesAndRejects) {
  testing::ScratchDir dir("bg");
  {
    std::ofstream f(dir.path() / "ok.txt");
    f << "# row value\n\n10 0.5\n11 0.25\n";
    std::ofstream g(dir.path() / "bad.txt");
    g << "10 zero\n";
  }
  const BackgroundCurve c = read_background_curve(dir.path() / "ok.txt");
  EXPECT_EQ(c.at(10), 0.5);
  EXPECT_EQ(c.at(11), 0.25);
  EXPECT_EQ(c.at(12), 0.0);
  EXPECT_THROW(read_background_curve(dir.path() / "bad.txt"), ConfigError);
}

TEST(MapParamsUnit, BoundsAndMidpoint) {
  const std::vector<ParamRange> r{{0.3, 4.7}, {-2.0, 6.0}};
  EXPECT_EQ(map_params_unit(std::vector<double>{0.3, -2.0}, r, MapDirection::kToUnit),
            (std::vector<double>{0.0, 0.0}));
  const auto mid = map_params_unit(std::vector<double>{2.5, 2.0}, r, MapDirection::kToUnit);
  EXPECT_NEAR(mid[0], 0.5, 1e-15);
  EXPECT_NEAR(mid[1], 0.5, 1e-15);
}

TEST(MapParamsUnit, RoundTrip) {
  Rng rng = make_stream(4, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ParamRange> r(7);
  for (auto& x : r) {
    x.lo = -10.0 + 10.0 * u(rng);
    x.hi = x.lo + 1e-3 + 20.0 * u(rng);
  }
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> y(7);
    for (std::size_t k = 0; k < 7; ++k) y[k] = r[k].lo + r[k].width() * u(rng);
    const auto back = map_params_unit(map_params_unit(y, r, MapDirection::kToUnit), r, MapDirection::kFromUnit);
    for (std::size_t k = 0; k < 7; ++k) EXPECT_NEAR(back[k], y[k], 1e-12);
  }
}

TEST(MapParamsUnit, ClampsAndCounts) {
  const std::vector<ParamRange> r{{0.0, 1.0}, {0.0, 2.0}};
  std::size_t clamped = 0;
  const auto v = map_params_unit(std::vector<double>{-0.5, 3.0}, r, MapDirection::kToUnit, &clamped);
  EXPECT_EQ(v, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(clamped, 2u);
  EXPECT_THROW(map_params_unit(std::vector<double>{1.5, 0.0}, r, MapDirection::kFromUnit), std::domain_error);
  const std::vector<ParamRange> bad{{1.0, 1.0}};
  EXPECT_THROW(map_params_unit(std::vector<double>{1.0}, bad, MapDirection::kToUnit), std::domain_error);
  EXPECT_THROW(map_params_unit(std::vector<double>{1.0}, r, MapDirection::kToUnit), ShapeError);
}

}  // namespace
}  // namespace ssbi
