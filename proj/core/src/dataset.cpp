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

#include "ssbi/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "ssbi/error.hpp"
#include "ssbi/parallel.hpp"

namespace ssbi {

namespace fs = std::filesystem;
using nlohmann::json;

std::string DatasetManifest::to_json() const {
  json j;
  j["version"] = version;
  j["n_samples"] = n_samples;
  if (image_shape) {
    j["image_shape"] = {image_shape->first, image_shape->second};
  } else {
    j["image_shape"] = nullptr;
  }
  j["signal_len"] = signal_len;
  j["param_names"] = param_names;
  json ranges = json::array();
  for (const ParamRange& r : param_ranges) ranges.push_back({r.lo, r.hi});
  j["param_ranges"] = ranges;
  j["seed"] = seed;
  j["dtype"] = dtype;
  return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  DatasetManifest m;
  try {
    const json j = json::parse(text);
    m.version = j.at("version").get<int>();
    m.n_samples = j.at("n_samples").get<std::size_t>();
    if (!j.at("image_shape").is_null()) {
      const auto& s = j.at("image_shape");
      m.image_shape = std::make_pair(s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>());
    }
    m.signal_len = j.at("signal_len").get<std::size_t>();
    m.param_names = j.at("param_names").get<std::vector<std::string>>();
    for (const auto& r : j.at("param_ranges")) {
      m.param_ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.dtype = j.at("dtype").get<std::string>();
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("invalid manifest: ") + e.what(), "manifest.json");
  }
  if (m.dtype != "f32le") throw CorruptionError("unsupported dtype " + m.dtype, "manifest.json");
  if (m.param_ranges.size() != m.param_names.size()) {
    throw CorruptionError("param_ranges and param_names differ in length", "manifest.json");
  }
  return m;
}

void write_f32le(std::ostream& out, std::span<const float> values) {
  std::vector<char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto u = std::bit_cast<std::uint32_t>(values[i]);
    bytes[4 * i + 0] = static_cast<char>(u & 0xff);
    bytes[4 * i + 1] = static_cast<char>((u >> 8) & 0xff);
    bytes[4 * i + 2] = static_cast<char>((u >> 16) & 0xff);
    bytes[4 * i + 3] = static_cast<char>((u >> 24) & 0xff);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<float> read_f32le_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptionError("missing blob " + path.string(), path.filename().string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) {
    throw CorruptionError("blob size is not a multiple of 4: " + path.string(),
                          path.filename().string());
  }
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint32_t u = std::uint32_t(bytes[4 * i]) | (std::uint32_t(bytes[4 * i + 1]) << 8) |
                            (std::uint32_t(bytes[4 * i + 2]) << 16) |
                            (std::uint32_t(bytes[4 * i + 3]) << 24);
    out[i] = std::bit_cast<float>(u);
  }
  return out;
}

DatasetRecord simulate_record(const GenerationRequest& request, std::size_t index) {
  Rng prior_rng = make_stream(request.seed, index, salt::kPrior);
  const std::vector<double> params = sample_prior(request.prior, prior_rng);
  const MultilayerSample sample = request.prior.to_sample(params);
  Rng noise_rng = make_stream(request.seed, index, salt::kNoise);
  const DetectorImage image = simulate_image(sample, request.geometry, request.noise, noise_rng);
  const InPlaneSignal signal = extract_inplane(image, request.signal);

  DatasetRecord rec;
  rec.params.assign(params.begin(), params.end());
  rec.signal.assign(signal.values.begin(), signal.values.end());
  if (request.store_images) rec.image.assign(image.intensities.begin(), image.intensities.end());
  return rec;
}

DatasetManifest generate_dataset(const GenerationRequest& request, const fs::path& dir) {
  if (request.n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
  request.prior.validate();
  request.geometry.validate();

  DatasetManifest manifest;
  manifest.n_samples = request.n;
  manifest.signal_len = request.signal.signal_length(request.geometry.n_pixels_z);
  if (request.store_images) {
    manifest.image_shape = std::make_pair(request.geometry.n_pixels_z, request.geometry.n_pixels_y);
  }
  manifest.param_names = request.prior.parameter_names();
  manifest.param_ranges = request.prior.parameter_ranges();
  manifest.seed = request.seed;

  fs::create_directories(dir);
  std::ofstream params_out(dir / "params.bin", std::ios::binary | std::ios::trunc);
  std::ofstream signals_out(dir / "signals.bin", std::ios::binary | std::ios::trunc);
  std::ofstream images_out;
  if (request.store_images) images_out.open(dir / "images.bin", std::ios::binary | std::ios::trunc);
  if (!params_out || !signals_out || (request.store_images && !images_out)) {
    throw RecordIoError("cannot open dataset blobs in " + dir.string(), 0);
  }

  const std::size_t chunk = std::max<std::size_t>(1, request.chunk);
  std::vector<DatasetRecord> buffer;
  for (std::size_t start = 0; start < request.n; start += chunk) {
    const std::size_t count = std::min(chunk, request.n - start);
    buffer.assign(count, {});
    parallel_for(count, request.threads,
                 [&](std::size_t k) { buffer[k] = simulate_record(request, start + k); });
    for (std::size_t k = 0; k < count; ++k) {
      const DatasetRecord& rec = buffer[k];
      if (rec.signal.size() != manifest.signal_len) {
        throw RecordIoError("signal length mismatch", start + k);
      }
      write_f32le(params_out, rec.params);
      write_f32le(signals_out, rec.signal);
      if (request.store_images) write_f32le(images_out, rec.image);
      if (!params_out || !signals_out || (request.store_images && !images_out)) {
        throw RecordIoError("write failed for record " + std::to_string(start + k), start + k);
      }
    }
  }
  std::ofstream manifest_out(dir / "manifest.json", std::ios::trunc);
  manifest_out << manifest.to_json();
  if (!manifest_out) throw RecordIoError("cannot write manifest.json", request.n - 1);
  return manifest;
}

std::span<const float> Dataset::param_row(std::size_t i) const {
  const std::size_t d = dimension();
  return std::span<const float>(params).subspan(i * d, d);
}

std::span<const float> Dataset::signal_row(std::size_t i) const {
  return std::span<const float>(signals).subspan(i * manifest.signal_len, manifest.signal_len);
}

std::size_t Dataset::image_pixels() const {
  return manifest.image_shape ? manifest.image_shape->first * manifest.image_shape->second : 0;
}

std::span<const float> Dataset::image_row(std::size_t i) const {
  const std::size_t p = image_pixels();
  if (p == 0 || images.empty()) throw ShapeError("dataset has no images");
  return std::span<const float>(images).subspan(i * p, p);
}

DatasetSplits split_dataset(std::size_t n, std::uint64_t seed, const SplitOptions& options) {
  if (options.test_count >= n) {
    throw std::invalid_argument("split_dataset: test split would consume every record");
  }
  DatasetSplits s;
  const std::size_t rest = n - options.test_count;
  for (std::size_t i = rest; i < n; ++i) s.test.push_back(i);
  std::vector<std::size_t> order(rest);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_stream(seed, 0, salt::kSplit);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(
      std::llround(options.validation_fraction * static_cast<double>(rest)));
  s.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

void write_dataset(const fs::path& dir, const Dataset& data) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "params.bin", std::ios::binary | std::ios::trunc);
    write_f32le(out, data.params);
  }
  {
    std::ofstream out(dir / "signals.bin", std::ios::binary | std::ios::trunc);
    write_f32le(out, data.signals);
  }
  if (data.manifest.image_shape) {
    std::ofstream out(dir / "images.bin", std::ios::binary | std::ios::trunc);
    write_f32le(out, data.images);
  }
  std::ofstream manifest_out(dir / "manifest.json", std::ios::trunc);
  manifest_out << data.manifest.to_json();
}

Dataset read_dataset(const fs::path& dir) {
  std::ifstream manifest_in(dir / "manifest.json");
  if (!manifest_in) throw CorruptionError("missing manifest in " + dir.string(), "manifest.json");
  std::stringstream text;
  text << manifest_in.rdbuf();
  Dataset d;
  d.manifest = DatasetManifest::from_json(text.str());
  const std::size_t n = d.manifest.n_samples;

  auto load = [&](const char* blob, std::size_t expected) {
    std::vector<float> v = read_f32le_file(dir / blob);
    if (v.size() != expected) {
      throw CorruptionError(std::string(blob) + " holds " + std::to_string(v.size()) +
                                " floats, manifest implies " + std::to_string(expected),
                            blob);
    }
    return v;
  };
  d.params = load("params.bin", n * d.manifest.param_names.size());
  d.signals = load("signals.bin", n * d.manifest.signal_len);
  if (d.manifest.image_shape) d.images = load("images.bin", n * d.image_pixels());
  return d;
}

LoadedDataset dataset_roundtrip(const fs::path& dir, const SplitOptions& options) {
  LoadedDataset out;
  out.data = read_dataset(dir);
  out.splits = split_dataset(out.data.size(), out.data.manifest.seed, options);
  return out;
}

void write_image(const fs::path& bin_path, const DetectorImage& image) {
  std::ofstream out(bin_path, std::ios::binary | std::ios::trunc);
  std::vector<float> values(image.intensities.begin(), image.intensities.end());
  write_f32le(out, values);
  if (!out) throw RecordIoError("cannot write " + bin_path.string(), 0);
  fs::path meta = bin_path;
  meta.replace_extension(".json");
  std::ofstream meta_out(meta, std::ios::trunc);
  meta_out << json{{"image_shape", {image.rows(), image.cols()}}, {"dtype", "f32le"}}.dump() << "\n";
}

DetectorImage read_image(const fs::path& bin_path, const ExperimentGeometry& geometry) {
  const std::vector<float> values = read_f32le_file(bin_path);
  if (values.size() != geometry.n_pixels_y * geometry.n_pixels_z) {
    throw CorruptionError("image size does not match the configured geometry",
                          bin_path.filename().string());
  }
  DetectorImage image;
  image.geometry = geometry;
  image.intensities.assign(values.begin(), values.end());
  return image;
}

}  // namespace ssbi
