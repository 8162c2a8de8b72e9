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

#include "hrtf_field/archive.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "binary_io.hpp"
#include "hrtf_field/errors.hpp"
#include "hrtf_field/log.hpp"

namespace hrtf_field {

namespace detail {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace detail

namespace {

constexpr std::string_view kMagic = "HRDF";

}  // namespace

std::uint64_t encoded_archive_size(const DatasetArchive& archive) {
  std::uint64_t n = 4 + 4 + 2 + archive.dataset_name.size() + 8 + 4;
  for (const auto& ear : archive.subject_ears) {
    const std::uint64_t L = ear.directions.size();
    const std::uint64_t T = static_cast<std::uint64_t>(ear.hrirs.cols());
    n += 2 + ear.subject_id.size() + 1 + 4 + 4 + L * 3 * 8 + L * T * 4;
  }
  return n;
}

std::vector<std::uint8_t> encode_archive(const DatasetArchive& archive) {
  validate(archive);
  for (const auto& ear : archive.subject_ears) {
    if (ear.stage != Stage::Raw) {
      throw InvariantError(ear.key() + ": only raw HRIR ears can be archived");
    }
  }
  detail::ByteWriter w(encoded_archive_size(archive));
  w.put_bytes(kMagic);
  w.put(kArchiveVersion);
  w.put_string16(archive.dataset_name);
  w.put(archive.sample_rate_hz);
  w.put(static_cast<std::uint32_t>(archive.subject_ears.size()));
  for (const auto& ear : archive.subject_ears) {
    w.put_string16(ear.subject_id);
    w.put(static_cast<std::uint8_t>(ear.ear));
    w.put(static_cast<std::uint32_t>(ear.directions.size()));
    w.put(static_cast<std::uint32_t>(ear.hrirs.cols()));
    for (const auto& d : ear.directions) {
      w.put(d.azimuth_deg);
      w.put(d.elevation_deg);
      w.put(d.distance_m);
    }
    const float* p = ear.hrirs.data();
    for (Eigen::Index i = 0; i < ear.hrirs.size(); ++i) w.put(p[i]);
  }
  return std::move(w.bytes());
}

DatasetArchive decode_archive(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  if (r.get_bytes(4 <= bytes.size() ? 4 : bytes.size(), "magic") != kMagic) {
    throw FormatError("bad magic, expected \"HRDF\"", 0);
  }
  const auto version_at = r.offset();
  const auto version = r.get<std::uint32_t>("version");
  if (version != kArchiveVersion) {
    throw FormatError(fmt::format("unsupported archive version {}", version), version_at);
  }
  DatasetArchive a;
  a.dataset_name = r.get_string16("dataset name");
  const auto rate_at = r.offset();
  a.sample_rate_hz = r.get<double>("sample rate");
  if (!(a.sample_rate_hz > 0.0) || !std::isfinite(a.sample_rate_hz)) {
    throw FormatError("sample rate must be positive and finite", rate_at);
  }
  const auto n_ears = r.get<std::uint32_t>("ear count");
  for (std::uint32_t e = 0; e < n_ears; ++e) {
    const auto ear_at = r.offset();
    SubjectEar ear;
    ear.dataset_name = a.dataset_name;
    ear.sample_rate_hz = a.sample_rate_hz;
    ear.stage = Stage::Raw;
    ear.subject_id = r.get_string16("subject id");
    const auto side_at = r.offset();
    const auto side = r.get<std::uint8_t>("ear side");
    if (side > 1) throw FormatError(fmt::format("invalid ear byte {}", side), side_at);
    ear.ear = static_cast<Ear>(side);
    const auto n_loc = r.get<std::uint32_t>("location count");
    const auto n_taps = r.get<std::uint32_t>("tap count");
    const std::uint64_t need = std::uint64_t{n_loc} * 24 + std::uint64_t{n_loc} * n_taps * 4;
    r.require(need, "ear payload");
    ear.directions.resize(n_loc);
    for (auto& d : ear.directions) {
      d.azimuth_deg = r.get<double>("azimuth");
      d.elevation_deg = r.get<double>("elevation");
      d.distance_m = r.get<double>("distance");
    }
    ear.hrirs.resize(n_loc, n_taps);
    float* p = ear.hrirs.data();
    for (std::uint64_t i = 0; i < std::uint64_t{n_loc} * n_taps; ++i) {
      p[i] = r.get<float>("HRIR sample");
    }
    try {
      validate(ear);
    } catch (const InvariantError& err) {
      throw FormatError(std::string("invariant violation: ") + err.what(), ear_at);
    }
    if (distinct_distance_count(ear) > 1) {
      warn(fmt::format("{} has {} distinct source distances; distance is ignored",
                       ear.key(), distinct_distance_count(ear)));
    }
    a.subject_ears.push_back(std::move(ear));
  }
  if (r.remaining() != 0) {
    throw FormatError(fmt::format("{} trailing bytes after last ear", r.remaining()),
                      r.offset());
  }
  if (a.subject_ears.empty()) throw FormatError("archive has no subject-ears", r.offset());
  return a;
}

DatasetArchive load_archive(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  return decode_archive(bytes);
}

void save_archive(const DatasetArchive& archive, const std::filesystem::path& path) {
  const auto bytes = encode_archive(archive);
  detail::write_file(path.string(), bytes);
}

}  // namespace hrtf_field
