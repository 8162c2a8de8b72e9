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

#include "hrtf_field/hrtf_data.hpp"

namespace hrtf_field {

// HRDF portable archive, little-endian throughout:
//
//   "HRDF" | version u32 = 1 | name_len u16, name | sample_rate f64 | n_ears u32
//   per ear: id_len u16, id | ear u8 (0 = L, 1 = R) | n_loc u32 | n_taps u32 |
//            n_loc x (azimuth f64, elevation f64, distance f64) |
//            n_loc x n_taps f32 samples, row-major
inline constexpr std::uint32_t kArchiveVersion = 1;

std::vector<std::uint8_t> encode_archive(const DatasetArchive& archive);
DatasetArchive decode_archive(std::span<const std::uint8_t> bytes);

// Exact encoded size of an archive, computed from the layout alone.
std::uint64_t encoded_archive_size(const DatasetArchive& archive);

DatasetArchive load_archive(const std::filesystem::path& path);
void save_archive(const DatasetArchive& archive, const std::filesystem::path& path);

}  // namespace hrtf_field
