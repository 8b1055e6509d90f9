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

#include "ssbi/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "ssbi/error.hpp"

namespace ssbi {

namespace {

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  std::size_t line = 0;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void fail(const Entry& e, const std::string& msg) {
  throw ConfigError("line " + std::to_string(e.line) + ": [" + e.section + "] " + e.key + ": " + msg);
}

double as_double(const Entry& e) {
  const std::string& v = e.value;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) fail(e, "expected a number, got '" + v + "'");
  return out;
}

std::uint64_t as_uint(const Entry& e) {
  const std::string& v = e.value;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail(e, "expected a non-negative integer, got '" + v + "'");
  return out;
}

std::size_t as_size(const Entry& e) { return static_cast<std::size_t>(as_uint(e)); }

bool as_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  fail(e, "expected true or false");
}

std::vector<double> as_doubles(const Entry& e) {
  std::vector<double> out;
  for (const std::string& item : split_list(e.value)) {
    Entry sub = e;
    sub.value = item;
    out.push_back(as_double(sub));
  }
  return out;
}

std::vector<Entry> tokenize(std::string_view text) {
  std::vector<Entry> out;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside a section");
    Entry e{section, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), line_no};
    if (e.key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

RunConfig::RunConfig() {
  prior = PriorSpec::from_materials(default_material_sequence(3), silicon_substrate(geometry.wavelength));
}

RunConfig RunConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
  const std::vector<Entry> entries = tokenize(text);
  RunConfig c;

  // Presets and the layer sequence are applied before any other key.
  std::size_t layers = 3;
  std::optional<std::vector<std::string>> materials;
  std::optional<const Entry*> substrate_kind;
  for (const Entry& e : entries) {
    if (e.section == "geometry" && e.key == "preset") {
      if (e.value == "desk") c.geometry = desk_geometry();
      else if (e.value == "beamline") c.geometry = beamline_geometry();
      else fail(e, "unknown preset '" + e.value + "'");
    } else if (e.section == "signal" && e.key == "preset") {
      if (e.value == "desk") c.signal = desk_signal_config();
      else if (e.value == "beamline") c.signal = beamline_signal_config();
      else fail(e, "unknown preset '" + e.value + "'");
    } else if (e.section == "sample" && e.key == "layers") {
      layers = as_size(e);
      if (layers == 0) fail(e, "at least one layer is required");
    } else if (e.section == "sample" && e.key == "materials") {
      materials = split_list(e.value);
    } else if (e.section == "sample" && e.key == "substrate") {
      if (e.value != "silicon" && e.value != "custom") fail(e, "expected silicon or custom");
      substrate_kind = &e;
    }
  }
  for (const Entry& e : entries) {
    if (e.section == "geometry" && e.key == "wavelength") c.geometry.wavelength = as_double(e);
  }
  std::vector<std::string> sequence = materials.value_or(default_material_sequence(layers));
  if (materials && sequence.size() != layers) {
    const bool layers_given = std::any_of(entries.begin(), entries.end(), [](const Entry& e) {
      return e.section == "sample" && e.key == "layers";
    });
    if (layers_given) throw ConfigError("sample.materials lists " + std::to_string(sequence.size()) +
                                        " layers but sample.layers is " + std::to_string(layers));
  }
  try {
    c.prior = PriorSpec::from_materials(sequence, silicon_substrate(c.geometry.wavelength));
  } catch (const ConfigError& err) {
    throw ConfigError(std::string("sample.materials: ") + err.what());
  }

  using Setter = std::function<void(RunConfig&, const Entry&)>;
  const std::map<std::string, std::map<std::string, Setter>> table{
      {"geometry",
       {{"preset", [](RunConfig&, const Entry&) {}},
        {"wavelength", [](RunConfig&, const Entry&) {}},
        {"incident_angle_deg", [](RunConfig& r, const Entry& e) { r.geometry.incident_angle = as_double(e) * std::numbers::pi / 180.0; }},
        {"pixel_size", [](RunConfig& r, const Entry& e) { r.geometry.pixel_size = as_double(e); }},
        {"n_pixels_y", [](RunConfig& r, const Entry& e) { r.geometry.n_pixels_y = as_size(e); }},
        {"n_pixels_z", [](RunConfig& r, const Entry& e) { r.geometry.n_pixels_z = as_size(e); }},
        {"detector_distance", [](RunConfig& r, const Entry& e) { r.geometry.detector_distance = as_double(e); }},
        {"specular_y", [](RunConfig& r, const Entry& e) { r.geometry.specular_y = as_double(e); }},
        {"specular_z", [](RunConfig& r, const Entry& e) { r.geometry.specular_z = as_double(e); }},
        {"beam_intensity", [](RunConfig& r, const Entry& e) { r.geometry.beam_intensity = as_double(e); }},
        {"constant_background", [](RunConfig& r, const Entry& e) { r.geometry.constant_background = as_double(e); }}}},
      {"sample",
       {{"layers", [](RunConfig&, const Entry&) {}},
        {"materials", [](RunConfig&, const Entry&) {}},
        {"substrate", [](RunConfig&, const Entry&) {}},
        {"substrate_dispersion", [](RunConfig& r, const Entry& e) { r.prior.substrate.dispersion = as_double(e); }},
        {"substrate_absorption", [](RunConfig& r, const Entry& e) { r.prior.substrate.absorption = as_double(e); }},
        {"substrate_roughness", [](RunConfig& r, const Entry& e) { r.prior.substrate.roughness = as_double(e); }},
        {"fixed", [](RunConfig& r, const Entry& e) {
           for (const std::string& item : split_list(e.value)) {
             const auto eq = item.find('=');
             if (eq == std::string::npos) fail(e, "expected name=value items");
             Entry sub = e;
             sub.value = trim(item.substr(eq + 1));
             r.prior.fixed[trim(item.substr(0, eq))] = as_double(sub);
           }
         }}}},
      {"signal",
       {{"preset", [](RunConfig&, const Entry&) {}},
        {"beamstop_low", [](RunConfig& r, const Entry& e) { r.signal.mask.z_lo = as_size(e); }},
        {"beamstop_high", [](RunConfig& r, const Entry& e) { r.signal.mask.z_hi = as_size(e); }},
        {"halfwidth", [](RunConfig& r, const Entry& e) { r.signal.mask.lateral_halfwidth = as_size(e); }},
        {"crop_low", [](RunConfig& r, const Entry& e) { r.signal.crop_low = as_size(e); }},
        {"crop_high", [](RunConfig& r, const Entry& e) { r.signal.crop_high = as_size(e); }},
        {"transform", [](RunConfig& r, const Entry& e) {
           if (e.value == "log10p1") r.signal.transform = IntensityTransform::kLog10p1;
           else if (e.value == "identity") r.signal.transform = IntensityTransform::kIdentity;
           else fail(e, "expected log10p1 or identity");
         }},
        {"normalization", [](RunConfig& r, const Entry& e) {
           if (e.value == "peak") r.signal.normalization = PartNormalization::kPeak;
           else if (e.value == "sum") r.signal.normalization = PartNormalization::kSum;
           else fail(e, "expected peak or sum");
         }},
        {"background", [&base_dir](RunConfig& r, const Entry& e) {
           std::filesystem::path p(e.value);
           if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
           if (!std::filesystem::is_regular_file(p)) fail(e, "file not found: " + p.string());
           r.background = p;
         }},
        {"noise", [](RunConfig& r, const Entry& e) { r.noise = as_bool(e); }}}},
      {"training",
       {{"flow_epochs", [](RunConfig& r, const Entry& e) { r.flow.epochs = as_size(e); }},
        {"flow_decay_period", [](RunConfig& r, const Entry& e) { r.flow.decay_period = as_size(e); }},
        {"cvae_epochs", [](RunConfig& r, const Entry& e) { r.cvae.epochs = as_size(e); }},
        {"cvae_decay_period", [](RunConfig& r, const Entry& e) { r.cvae.decay_period = as_size(e); }},
        {"batch_size", [](RunConfig& r, const Entry& e) { r.flow.batch_size = r.cvae.batch_size = as_size(e); }},
        {"patience", [](RunConfig& r, const Entry& e) { r.flow.patience = r.cvae.patience = as_size(e); }},
        {"learning_rate", [](RunConfig& r, const Entry& e) { r.flow.optimizer.lr = r.cvae.optimizer.lr = as_double(e); }},
        {"weight_decay", [](RunConfig& r, const Entry& e) { r.flow.optimizer.weight_decay = r.cvae.optimizer.weight_decay = as_double(e); }},
        {"decay_factor", [](RunConfig& r, const Entry& e) { r.flow.decay_factor = r.cvae.decay_factor = as_double(e); }},
        {"latent_dim", [](RunConfig& r, const Entry& e) { r.model.latent_dim = as_size(e); }},
        {"n_transforms", [](RunConfig& r, const Entry& e) { r.model.n_transforms = as_size(e); }},
        {"hidden", [](RunConfig& r, const Entry& e) { r.model.hidden = as_size(e); }},
        {"embed_hidden", [](RunConfig& r, const Entry& e) { r.model.embed_hidden = as_size(e); }},
        {"context_dim", [](RunConfig& r, const Entry& e) { r.model.context_dim = as_size(e); }},
        {"widths", [](RunConfig& r, const Entry& e) {
           r.model.widths.clear();
           for (double w : as_doubles(e)) r.model.widths.push_back(static_cast<int>(w));
         }},
        {"test_count", [](RunConfig& r, const Entry& e) { r.split.test_count = as_size(e); }},
        {"validation_fraction", [](RunConfig& r, const Entry& e) { r.split.validation_fraction = as_double(e); }}}},
      {"abc",
       {{"acceptance_rate", [](RunConfig& r, const Entry& e) { r.abc.acceptance_rate = as_double(e); }},
        {"bandwidth", [](RunConfig& r, const Entry& e) { r.abc.bandwidth = as_double(e); }},
        {"bandwidths", [](RunConfig& r, const Entry& e) { r.abc.bandwidths = as_doubles(e); }}}},
      {"io", {{"seed", [](RunConfig& r, const Entry& e) { r.seed = as_uint(e); }}}},
  };

  for (const Entry& e : entries) {
    if (e.section == "sample" && e.key.rfind("range.", 0) == 0) continue;
    const auto sec = table.find(e.section);
    if (sec == table.end()) throw ConfigError("line " + std::to_string(e.line) + ": unknown section [" + e.section + "]");
    const auto key = sec->second.find(e.key);
    if (key == sec->second.end()) fail(e, "unknown key");
    key->second(c, e);
  }
  if (substrate_kind && (*substrate_kind)->value == "custom") {
    const bool has_delta = std::any_of(entries.begin(), entries.end(), [](const Entry& e) {
      return e.section == "sample" && e.key == "substrate_dispersion";
    });
    if (!has_delta) fail(**substrate_kind, "custom substrate needs substrate_dispersion");
  }

  // Range overrides address "layer<j>.<field>" parameter names.
  for (const Entry& e : entries) {
    if (e.section != "sample" || e.key.rfind("range.", 0) != 0) continue;
    const std::string name = e.key.substr(6);
    const auto values = as_doubles(e);
    if (values.size() != 2 || !(values[0] < values[1])) fail(e, "expected 'lo, hi' with lo < hi");
    bool found = false;
    for (std::size_t j = 0; j < c.prior.layers.size() && !found; ++j) {
      for (std::size_t f = 0; f < kLayerFieldNames.size(); ++f) {
        if (parameter_name(j, f) == name) {
          c.prior.layers[j].ranges[f] = {values[0], values[1]};
          found = true;
          break;
        }
      }
    }
    if (!found) fail(e, "unknown parameter '" + name + "'");
  }

  try {
    c.geometry.validate();
    c.signal.mask.validate(c.geometry.n_pixels_z);
    c.signal.signal_length(c.geometry.n_pixels_z);
    c.prior.validate();
    c.flow.validate();
    c.cvae.validate();
    c.abc.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& err) {
    throw ConfigError(err.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.parent_path());
}

GenerationRequest RunConfig::generation(std::size_t n, unsigned threads) const {
  GenerationRequest r;
  r.prior = prior;
  r.geometry = geometry;
  r.signal = signal;
  r.n = n;
  r.seed = seed;
  r.noise = noise;
  r.threads = threads;
  return r;
}

}  // namespace ssbi
