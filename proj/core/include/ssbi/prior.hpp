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

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssbi/optics.hpp"
#include "ssbi/param_map.hpp"
#include "ssbi/rng.hpp"

namespace ssbi {

/// Order of the six per-layer fields in parameter vectors.
inline constexpr std::array<std::string_view, Layer::kParameterCount> kLayerFieldNames{
    "dispersion", "absorption", "thickness", "roughness", "hurst", "lateral_correlation"};

/// Uniform ranges of the six layer fields for a material class. "TaO" shares
/// the Ta ranges. Throws ConfigError for unknown materials.
std::array<ParamRange, Layer::kParameterCount> material_ranges(std::string_view material);

struct LayerPrior {
  std::string material;
  std::array<ParamRange, Layer::kParameterCount> ranges;
};

/// Independent uniform prior over every free layer field. Fields listed in
/// `fixed` (by parameter name, e.g. "layer0.thickness") are held constant and
/// removed from the parameter vector.
struct PriorSpec {
  std::vector<LayerPrior> layers;
  Substrate substrate;
  std::map<std::string, double> fixed;
  double min_width = 1e-12;  // narrower ranges are widened to this

  static PriorSpec from_materials(const std::vector<std::string>& sequence,
                                  const Substrate& substrate);

  void validate() const;
  std::size_t dimension() const;
  std::vector<std::string> parameter_names() const;
  std::vector<ParamRange> parameter_ranges() const;
  /// Builds a sample from the free parameter values in physical units.
  MultilayerSample to_sample(std::span<const double> free_values) const;
};

std::string parameter_name(std::size_t layer, std::size_t field);

/// One draw of the free parameters, physical units, in parameter_names() order.
std::vector<double> sample_prior(const PriorSpec& spec, Rng& rng);

/// "TaO,Ta,Cu3N" for 3 layers, then alternating Ta/Cu3N repeats.
std::vector<std::string> default_material_sequence(std::size_t n_layers);

}  // namespace ssbi
