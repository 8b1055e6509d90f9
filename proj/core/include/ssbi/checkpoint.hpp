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

#include <filesystem>
#include <string>

#include "ssbi/parameters.hpp"

namespace ssbi {

/// Contents of a model checkpoint: the model kind ("flow" or "cvae"), its
/// configuration as a JSON object text, and every named tensor in float32.
struct Checkpoint {
  std::string kind;
  std::string config_json;
  nn::ParameterSet<float> tensors;
};

/// One UTF-8 JSON header line holding kind, config and the tensor directory
/// (name, shape, trainable, byte offset, byte length), followed by the
/// concatenated little-endian float32 payloads.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws CorruptionError when the payload does not match the directory.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace ssbi
