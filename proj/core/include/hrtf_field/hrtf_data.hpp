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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hrtf_field {

// Source direction in degrees. Azimuth is counterclockwise from the front,
// elevation positive upwards. Distance is carried through but never used by
// the models (far-field only).
struct Direction {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double distance_m = 0.0;

  friend bool operator==(const Direction&, const Direction&) = default;
};

// MirroredRight marks a right ear whose azimuths were reflected so that it
// can share a model with left ears.
enum class Ear : std::uint8_t { Left = 0, Right = 1, MirroredRight = 2 };

enum class Stage : std::uint8_t { Raw, Processed };

using HrirMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One ear of one subject. Raw ears carry HRIRs (L x T), processed ears carry
// normalized dB magnitudes (L x K) and the frequency grid they live on.
struct SubjectEar {
  std::string subject_id;
  std::string dataset_name;
  Ear ear = Ear::Left;
  double sample_rate_hz = 0.0;
  std::vector<Direction> directions;
  Stage stage = Stage::Raw;
  HrirMatrix hrirs;
  Eigen::MatrixXd magnitudes_db;
  std::vector<double> freq_grid_hz;

  std::size_t location_count() const noexcept { return directions.size(); }
  std::string key() const;
};

struct DatasetArchive {
  std::string dataset_name;
  double sample_rate_hz = 0.0;
  std::vector<SubjectEar> subject_ears;

  friend bool operator==(const DatasetArchive&, const DatasetArchive&);
};

bool operator==(const SubjectEar& a, const SubjectEar& b);

// dB magnitudes on a set of directions. `wrapped` is either empty or flags
// rows that are azimuth-wrapped copies of other rows.
struct MagnitudeField {
  std::string label;
  std::vector<Direction> directions;
  Eigen::MatrixXd values_db;
  std::vector<double> freq_grid_hz;
  std::vector<bool> wrapped;

  std::size_t rows() const noexcept { return directions.size(); }
  std::size_t bins() const noexcept {
    return static_cast<std::size_t>(values_db.cols());
  }
  bool is_wrapped(std::size_t row) const {
    return !wrapped.empty() && wrapped[row];
  }

  MagnitudeField select_rows(std::span<const std::size_t> rows) const;
};

// Throw InvariantError when the documented invariants do not hold.
void validate(const SubjectEar& ear);
void validate(const DatasetArchive& archive);
void validate(const MagnitudeField& field);

// View of a processed ear as a magnitude field.
MagnitudeField field_of(const SubjectEar& ear);

// Number of distinct distance_m values among an ear's directions.
std::size_t distinct_distance_count(const SubjectEar& ear);

// Concatenates the subject-ears of several archives. Throws InvariantError on
// a repeated (dataset, subject, ear) triple.
std::vector<SubjectEar> merge_archives(std::span<const DatasetArchive> archives);

std::string to_string(Ear ear);

}  // namespace hrtf_field
