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
#include <random>

namespace ssbi {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based key for stream `index` under `seed`. Distinct salts give
/// unrelated families of streams for the same (seed, index).
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index,
                         std::uint64_t salt = 0) noexcept;

inline Rng make_stream(std::uint64_t seed, std::uint64_t index,
                       std::uint64_t salt = 0) {
  return Rng(stream_key(seed, index, salt));
}

// Salts used across the library so that streams never collide.
namespace salt {
inline constexpr std::uint64_t kPrior = 0x70726f72;
inline constexpr std::uint64_t kNoise = 0x6e6f6973;
inline constexpr std::uint64_t kSplit = 0x73706c74;
inline constexpr std::uint64_t kShuffle = 0x73687566;
inline constexpr std::uint64_t kInit = 0x696e6974;
inline constexpr std::uint64_t kLatent = 0x6c617465;
inline constexpr std::uint64_t kBatch = 0x62617463;
}  // namespace salt

}  // namespace ssbi
