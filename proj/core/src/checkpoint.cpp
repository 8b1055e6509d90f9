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

#include "ssbi/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>

#include "json.hpp"
#include "ssbi/dataset.hpp"
#include "ssbi/error.hpp"

namespace ssbi {

using nlohmann::json;

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  json header;
  header["format"] = "ssbi-checkpoint";
  header["version"] = 1;
  header["kind"] = checkpoint.kind;
  header["config"] = checkpoint.config_json.empty() ? json::object()
                                                     : json::parse(checkpoint.config_json);
  json directory = json::array();
  std::size_t offset = 0;
  for (const auto& t : checkpoint.tensors) {
    const std::size_t bytes = t.size() * sizeof(float);
    directory.push_back({{"name", t.name},
                         {"shape", t.shape},
                         {"trainable", t.trainable},
                         {"offset", offset},
                         {"bytes", bytes}});
    offset += bytes;
  }
  header["tensors"] = directory;

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << header.dump() << '\n';
  for (const auto& t : checkpoint.tensors) {
    write_f32le(out, std::span<const float>(t.value.data(), t.size()));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw CorruptionError("checkpoint header missing", "header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("checkpoint header is not JSON: ") + e.what(), "header");
  }
  if (header.value("format", "") != "ssbi-checkpoint") {
    throw CorruptionError("not an ssbi checkpoint", "header");
  }
  std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Checkpoint cp;
  cp.kind = header.at("kind").get<std::string>();
  cp.config_json = header.at("config").dump();
  for (const json& entry : header.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<std::vector<int>>();
    const auto offset = entry.at("offset").get<std::size_t>();
    const auto bytes = entry.at("bytes").get<std::size_t>();
    const std::size_t id = cp.tensors.add(name, shape, entry.value("trainable", true));
    auto& t = cp.tensors[id];
    if (bytes != t.size() * sizeof(float) || offset + bytes > payload.size()) {
      throw CorruptionError("tensor " + name + " does not fit the checkpoint payload", name);
    }
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto* p = reinterpret_cast<const unsigned char*>(payload.data() + offset + 4 * k);
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                 (static_cast<std::uint32_t>(p[1]) << 8) |
                                 (static_cast<std::uint32_t>(p[2]) << 16) |
                                 (static_cast<std::uint32_t>(p[3]) << 24);
      float v;
      std::memcpy(&v, &bits, sizeof v);
      t.value.data()[k] = v;
    }
  }
  return cp;
}

}  // namespace ssbi
