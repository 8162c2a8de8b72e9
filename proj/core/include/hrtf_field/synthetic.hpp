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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hrtf_field/hrtf_data.hpp"
#include "hrtf_field/random.hpp"

// Deterministic synthetic grids, fields and HRIR archives for tests,
// benchmarks and the `synth` command.
namespace hrtf_field::synth {

// One ring per elevation with azimuth_counts[i] equally spaced azimuths
// starting at 0. A count of 1 puts a single point at azimuth 0 (poles).
std::vector<Direction> ring_grid(std::span<const double> elevations_deg,
                                 std::span<const int> azimuth_counts, double distance_m = 1.0);

// n_rings elevations evenly spaced over [el_min, el_max], n_azimuths each.
std::vector<Direction> uniform_ring_grid(int n_rings, int n_azimuths, double el_min_deg,
                                         double el_max_deg, double distance_m = 1.0);

// Uniform on the sphere band [el_min, el_max].
std::vector<Direction> random_directions(std::size_t n, std::uint64_t seed,
                                         double el_min_deg = -90.0, double el_max_deg = 90.0);

// Interaural-polar sampling in the style of CIPIC: 25 lateral angles times 50
// polar angles. Almost every direction has its own elevation.
std::vector<Direction> interaural_grid();

// The six axis directions.
std::vector<Direction> octahedral_grid();

// dB field that is a random polynomial of degree `order` in the unit vector,
// with coefficients varying smoothly over frequency, scaled to an RMS of
// amplitude_db.
MagnitudeField smooth_pattern_field(std::span<const Direction> directions,
                                    std::span<const double> freq_hz, std::uint64_t seed,
                                    int order = 3, double amplitude_db = 6.0);

// Low-dimensional anthropometry stand-in; each entry in [-1, 1].
using SubjectTraits = std::array<double, 3>;

SubjectTraits random_traits(Rng& rng);

// Direct path plus three reflections with fractional delays, all smooth in
// direction and traits. Right ears mirror the geometry and perturb the traits.
HrirMatrix synth_hrirs(std::span<const Direction> directions, const SubjectTraits& traits,
                       Ear ear, double sample_rate_hz, int taps);

struct DatasetSpec {
  std::string name = "synthetic";
  double sample_rate_hz = 44100.0;
  std::vector<Direction> grid;
  int n_subjects = 4;
  int taps = 128;
  std::uint64_t seed = 0;
  bool both_ears = true;
};

DatasetArchive make_archive(const DatasetSpec& spec);

// n datasets with varied ring grids, elevation ranges and sample rates.
std::vector<DatasetSpec> dataset_collection(int n_datasets, int subjects_per_dataset,
                                            std::uint64_t seed);

}  // namespace hrtf_field::synth
