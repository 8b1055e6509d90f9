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

#include "ssbi/prior.hpp"

#include <random>
#include <stdexcept>

#include "ssbi/error.hpp"

namespace ssbi {

std::array<ParamRange, Layer::kParameterCount> material_ranges(std::string_view material) {
  if (material == "Ta" || material == "TaO") {
    return {{{1e-5, 4e-5}, {0.1e-7, 90e-7}, {0.3, 4.7}, {0.3, 5.0}, {0.1, 0.9}, {3.0, 30.0}}};
  }
  if (material == "Cu3N") {
    return {{{0.8e-5, 3e-5}, {0.1e-7, 90e-7}, {0.3, 12.0}, {0.3, 5.0}, {0.1, 0.9}, {3.0, 30.0}}};
  }
  throw ConfigError("unknown material class: " + std::string(material));
}

std::string parameter_name(std::size_t layer, std::size_t field) {
  return "layer" + std::to_string(layer) + "." + std::string(kLayerFieldNames.at(field));
}

PriorSpec PriorSpec::from_materials(const std::vector<std::string>& sequence,
                                    const Substrate& substrate) {
  PriorSpec spec;
  for (const std::string& m : sequence) spec.layers.push_back({m, material_ranges(m)});
  spec.substrate = substrate;
  return spec;
}

void PriorSpec::validate() const {
  if (layers.empty()) throw ConfigError("prior has no layers");
  for (const LayerPrior& l : layers) {
    for (const ParamRange& r : l.ranges) {
      if (!(r.lo <= r.hi)) throw ConfigError("prior range with lo > hi");
    }
  }
  for (const auto& [name, value] : fixed) {
    bool known = false;
    for (std::size_t j = 0; j < layers.size() && !known; ++j) {
      for (std::size_t f = 0; f < Layer::kParameterCount && !known; ++f) {
        known = parameter_name(j, f) == name;
      }
    }
    if (!known) throw ConfigError("fixed parameter does not exist: " + name);
  }
  if (dimension() == 0) throw ConfigError("prior has no free parameters");
}

std::size_t PriorSpec::dimension() const {
  return layers.size() * Layer::kParameterCount - fixed.size();
}

std::vector<std::string> PriorSpec::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < layers.size(); ++j) {
    for (std::size_t f = 0; f < Layer::kParameterCount; ++f) {
      std::string n = parameter_name(j, f);
      if (!fixed.contains(n)) names.push_back(std::move(n));
    }
  }
  return names;
}

std::vector<ParamRange> PriorSpec::parameter_ranges() const {
  std::vector<ParamRange> out;
  for (std::size_t j = 0; j < layers.size(); ++j) {
    for (std::size_t f = 0; f < Layer::kParameterCount; ++f) {
      if (fixed.contains(parameter_name(j, f))) continue;
      ParamRange r = layers[j].ranges[f];
      if (r.hi - r.lo < min_width) r.hi = r.lo + min_width;
      out.push_back(r);
    }
  }
  return out;
}

MultilayerSample PriorSpec::to_sample(std::span<const double> free_values) const {
  if (free_values.size() != dimension()) {
    throw ShapeError("parameter vector length does not match the prior dimension");
  }
  MultilayerSample sample;
  sample.substrate = substrate;
  std::size_t k = 0;
  for (std::size_t j = 0; j < layers.size(); ++j) {
    std::array<double, Layer::kParameterCount> v{};
    for (std::size_t f = 0; f < Layer::kParameterCount; ++f) {
      const auto it = fixed.find(parameter_name(j, f));
      v[f] = it != fixed.end() ? it->second : free_values[k++];
    }
    sample.layers.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
  }
  return sample;
}

std::vector<double> sample_prior(const PriorSpec& spec, Rng& rng) {
  const std::vector<ParamRange> ranges = spec.parameter_ranges();
  std::vector<double> out(ranges.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    out[i] = ranges[i].lo + unit(rng) * ranges[i].width();
  }
  return out;
}

std::vector<std::string> default_material_sequence(std::size_t n_layers) {
  std::vector<std::string> seq;
  if (n_layers == 0) return seq;
  seq.push_back("TaO");
  for (std::size_t i = 1; i < n_layers; ++i) seq.push_back(i % 2 == 1 ? "Ta" : "Cu3N");
  return seq;
}

}  // namespace ssbi
