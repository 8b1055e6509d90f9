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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssbi/inplane.hpp"
#include "ssbi/param_map.hpp"
#include "ssbi/prior.hpp"
#include "ssbi/simulate.hpp"

namespace ssbi {

/// Contents of manifest.json. All blobs are little-endian float32, row-major.
struct DatasetManifest {
  int version = 1;
  std::size_t n_samples = 0;
  std::optional<std::pair<std::size_t, std::size_t>> image_shape;  // (H, W)
  std::size_t signal_len = 0;
  std::vector<std::string> param_names;
  std::vector<ParamRange> param_ranges;
  std::uint64_t seed = 0;
  std::string dtype = "f32le";

  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text);
};

struct GenerationRequest {
  PriorSpec prior;
  ExperimentGeometry geometry;
  SignalConfig signal;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool noise = false;
  bool store_images = false;
  unsigned threads = 1;
  std::size_t chunk = 256;  // records simulated in memory before each write
};

/// One simulated record: physical parameters, signal and (optionally) the
/// image, each as float32.
struct DatasetRecord {
  std::vector<float> params;
  std::vector<float> signal;
  std::vector<float> image;
};

/// Record `index` depends only on (seed, index, prior, geometry, signal config).
DatasetRecord simulate_record(const GenerationRequest& request, std::size_t index);

/// Writes manifest.json, params.bin, signals.bin and optionally images.bin
/// into `dir` (created if needed). Output bytes do not depend on `threads`.
DatasetManifest generate_dataset(const GenerationRequest& request,
                                 const std::filesystem::path& dir);

struct Dataset {
  DatasetManifest manifest;
  std::vector<float> params;   // n x d
  std::vector<float> signals;  // n x signal_len
  std::vector<float> images;   // n x H x W, empty when absent

  std::size_t size() const { return manifest.n_samples; }
  std::size_t dimension() const { return manifest.param_names.size(); }
  std::span<const float> param_row(std::size_t i) const;
  std::span<const float> signal_row(std::size_t i) const;
  std::span<const float> image_row(std::size_t i) const;
  std::size_t image_pixels() const;
};

struct SplitOptions {
  std::size_t test_count = 1000;
  double validation_fraction = 0.2;
};

struct DatasetSplits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Last `test_count` records form the test split; a seeded shuffle of the
/// rest assigns round(validation_fraction * rest) records to validation.
/// Index lists are returned sorted.
DatasetSplits split_dataset(std::size_t n, std::uint64_t seed, const SplitOptions& options = {});

/// Writes arrays with an existing manifest (used for derived datasets).
void write_dataset(const std::filesystem::path& dir, const Dataset& data);
/// Reads a dataset directory; CorruptionError names the blob whose size does
/// not match the manifest.
Dataset read_dataset(const std::filesystem::path& dir);

struct LoadedDataset {
  Dataset data;
  DatasetSplits splits;
};
LoadedDataset dataset_roundtrip(const std::filesystem::path& dir,
                                const SplitOptions& options = {});

/// Little-endian float32 helpers shared by all binary formats.
void write_f32le(std::ostream& out, std::span<const float> values);
std::vector<float> read_f32le_file(const std::filesystem::path& path);

/// Raw image output: <stem>.bin (float32, rows x cols) with <stem>.json
/// holding {"image_shape": [H, W], "dtype": "f32le"}.
void write_image(const std::filesystem::path& bin_path, const DetectorImage& image);
DetectorImage read_image(const std::filesystem::path& bin_path,
                         const ExperimentGeometry& geometry);

}  // namespace ssbi
