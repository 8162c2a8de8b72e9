// Copyright 2026 The hrtf-field Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hrtf_field/siren.hpp"

namespace hrtf_field {

// HFNF model file, little-endian:
//   "HFNF" | version u32 = 1 | input u32 | hidden u32 | n_hidden u32 |
//   output u32 | latent u32 | omega0 f64 |
//   per layer: weight (out x in, row-major) f64, then bias (out) f64
inline constexpr std::uint32_t kModelVersion = 1;

std::vector<std::uint8_t> encode_model(const SirenNetwork& net);
SirenNetwork decode_model(std::span<const std::uint8_t> bytes);

void save_model(const SirenNetwork& net, const std::filesystem::path& path);
SirenNetwork load_model(const std::filesystem::path& path);

}  // namespace hrtf_field
