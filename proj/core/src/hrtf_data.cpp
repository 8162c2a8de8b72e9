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

#include "hrtf_field/hrtf_data.hpp"

#include <cmath>
#include <cstring>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "hrtf_field/errors.hpp"
#include "hrtf_field/preprocess.hpp"

namespace hrtf_field {
namespace {

template <typename M>
bool bitwise_equal(const M& a, const M& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.size() == 0) return true;
  return std::memcmp(a.data(), b.data(),
                     sizeof(typename M::Scalar) * a.size()) == 0;
}

void validate_directions(const std::vector<Direction>& dirs,
                         const std::string& who) {
  if (dirs.empty()) throw InvariantError(who + ": no directions");
  std::set<std::tuple<double, double, double>> seen;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const auto& d = dirs[i];
    if (!std::isfinite(d.azimuth_deg) || !std::isfinite(d.elevation_deg) ||
        !std::isfinite(d.distance_m)) {
      throw InvariantError(fmt::format("{}: direction {} is not finite", who, i));
    }
    if (d.elevation_deg < -90.0 || d.elevation_deg > 90.0) {
      throw InvariantError(fmt::format("{}: direction {} has elevation {} outside [-90, 90]",
                                       who, i, d.elevation_deg));
    }
    auto key = std::make_tuple(canonicalize_azimuth(d.azimuth_deg),
                               d.elevation_deg, d.distance_m);
    if (!seen.insert(key).second) {
      throw InvariantError(fmt::format("{}: duplicate direction ({}, {}) at index {}",
                                       who, d.azimuth_deg, d.elevation_deg, i));
    }
  }
}

}  // namespace

std::string to_string(Ear ear) {
  switch (ear) {
    case Ear::Left: return "L";
    case Ear::Right: return "R";
    case Ear::MirroredRight: return "R*";
  }
  return "?";
}

std::string SubjectEar::key() const {
  return dataset_name + "/" + subject_id + "/" + to_string(ear);
}

bool operator==(const SubjectEar& a, const SubjectEar& b) {
  return a.subject_id == b.subject_id && a.dataset_name == b.dataset_name &&
         a.ear == b.ear && a.sample_rate_hz == b.sample_rate_hz &&
         a.directions == b.directions && a.stage == b.stage &&
         bitwise_equal(a.hrirs, b.hrirs) &&
         bitwise_equal(a.magnitudes_db, b.magnitudes_db) &&
         a.freq_grid_hz == b.freq_grid_hz;
}

bool operator==(const DatasetArchive& a, const DatasetArchive& b) {
  return a.dataset_name == b.dataset_name &&
         a.sample_rate_hz == b.sample_rate_hz && a.subject_ears == b.subject_ears;
}

MagnitudeField MagnitudeField::select_rows(std::span<const std::size_t> idx) const {
  MagnitudeField out;
  out.label = label;
  out.freq_grid_hz = freq_grid_hz;
  out.values_db.resize(static_cast<Eigen::Index>(idx.size()), values_db.cols());
  out.directions.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto src = idx[r];
    if (src >= rows()) throw InvariantError("select_rows: row index out of range");
    out.directions.push_back(directions[src]);
    out.values_db.row(static_cast<Eigen::Index>(r)) =
        values_db.row(static_cast<Eigen::Index>(src));
    if (!wrapped.empty()) out.wrapped.push_back(wrapped[src]);
  }
  return out;
}

void validate(const SubjectEar& ear) {
  const std::string who = ear.key();
  validate_directions(ear.directions, who);
  if (!(ear.sample_rate_hz > 0.0) || !std::isfinite(ear.sample_rate_hz)) {
    throw InvariantError(who + ": sample rate must be positive");
  }
  const auto L = static_cast<Eigen::Index>(ear.directions.size());
  if (ear.stage == Stage::Raw) {
    if (ear.hrirs.rows() != L) {
      throw InvariantError(fmt::format("{}: {} directions but {} HRIR rows", who, L,
                                       ear.hrirs.rows()));
    }
    if (ear.hrirs.cols() < 1) throw InvariantError(who + ": HRIRs have no taps");
  } else {
    if (ear.magnitudes_db.rows() != L) {
      throw InvariantError(fmt::format("{}: {} directions but {} magnitude rows", who,
                                       L, ear.magnitudes_db.rows()));
    }
    if (static_cast<std::size_t>(ear.magnitudes_db.cols()) != ear.freq_grid_hz.size()) {
      throw InvariantError(who + ": magnitude columns do not match frequency grid");
    }
  }
}

void validate(const DatasetArchive& archive) {
  if (archive.subject_ears.empty()) {
    throw InvariantError("archive '" + archive.dataset_name + "' has no subject-ears");
  }
  for (const auto& ear : archive.subject_ears) {
    if (ear.sample_rate_hz != archive.sample_rate_hz) {
      throw InvariantError(ear.key() + ": sample rate differs from archive");
    }
    if (ear.dataset_name != archive.dataset_name) {
      throw InvariantError(ear.key() + ": dataset name differs from archive");
    }
    if (ear.ear == Ear::MirroredRight) {
      throw InvariantError(ear.key() + ": archives only hold unmirrored ears");
    }
    validate(ear);
  }
}

void validate(const MagnitudeField& field) {
  if (field.directions.empty()) throw InvariantError(field.label + ": empty field");
  if (static_cast<std::size_t>(field.values_db.rows()) != field.directions.size()) {
    throw InvariantError(field.label + ": row count does not match directions");
  }
  if (static_cast<std::size_t>(field.values_db.cols()) != field.freq_grid_hz.size()) {
    throw InvariantError(field.label + ": column count does not match frequency grid");
  }
  if (!field.wrapped.empty() && field.wrapped.size() != field.directions.size()) {
    throw InvariantError(field.label + ": wrap flags do not match directions");
  }
  for (std::size_t k = 1; k < field.freq_grid_hz.size(); ++k) {
    if (!(field.freq_grid_hz[k] > field.freq_grid_hz[k - 1])) {
      throw InvariantError(field.label + ": frequency grid not strictly increasing");
    }
  }
}

MagnitudeField field_of(const SubjectEar& ear) {
  if (ear.stage != Stage::Processed) {
    throw InvariantError(ear.key() + ": field_of requires a processed ear");
  }
  MagnitudeField f;
  f.label = ear.key();
  f.directions = ear.directions;
  f.values_db = ear.magnitudes_db;
  f.freq_grid_hz = ear.freq_grid_hz;
  return f;
}

std::size_t distinct_distance_count(const SubjectEar& ear) {
  std::set<double> d;
  for (const auto& dir : ear.directions) d.insert(dir.distance_m);
  return d.size();
}

std::vector<SubjectEar> merge_archives(std::span<const DatasetArchive> archives) {
  std::vector<SubjectEar> out;
  std::set<std::tuple<std::string, std::string, Ear>> keys;
  for (const auto& a : archives) {
    for (const auto& ear : a.subject_ears) {
      if (!keys.emplace(ear.dataset_name, ear.subject_id, ear.ear).second) {
        throw InvariantError("duplicate subject-ear " + ear.key() + " in merge");
      }
      out.push_back(ear);
    }
  }
  return out;
}

}  // namespace hrtf_field
