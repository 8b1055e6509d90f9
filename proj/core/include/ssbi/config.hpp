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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssbi/abc.hpp"
#include "ssbi/dataset.hpp"
#include "ssbi/inplane.hpp"
#include "ssbi/prior.hpp"
#include "ssbi/simulate.hpp"
#include "ssbi/trainer.hpp"

namespace ssbi {

struct ModelSettings {
  std::size_t latent_dim = 16;
  std::size_t n_transforms = 8;
  std::size_t hidden = 128;
  std::size_t embed_hidden = 128;
  std::size_t context_dim = 64;
  std::vector<int> widths{16, 32, 64, 128, 128, 128};
};

/// Everything a pipeline run depends on. Defaults describe the desk-scale
/// setup: desk geometry and mask, three layers (TaO, Ta, Cu3N) on silicon.
struct RunConfig {
  ExperimentGeometry geometry = desk_geometry();
  PriorSpec prior;
  SignalConfig signal = desk_signal_config();
  std::optional<std::filesystem::path> background;
  bool noise = false;
  TrainConfig flow = TrainConfig::for_phase(TrainPhase::kFlow);
  TrainConfig cvae = TrainConfig::for_phase(TrainPhase::kCvae);
  ModelSettings model;
  SplitOptions split;
  AbcConfig abc;
  std::uint64_t seed = 0;

  RunConfig();

  /// Parses the sectioned "key = value" format. Unknown sections or keys,
  /// malformed lines and unreadable input paths raise ConfigError naming the
  /// line. Relative paths resolve against `base_dir`.
  static RunConfig parse(std::string_view text, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  /// Generation request for n records under this configuration.
  GenerationRequest generation(std::size_t n, unsigned threads) const;
};

}  // namespace ssbi
