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
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hrtf_field/hrtf_data.hpp"

namespace hrtf_field {

// Frequencies at which magnitudes are evaluated. bins_hz[k] equals
// k_indices[k] * reference_rate_hz / fft_size.
struct FrequencyGrid {
  std::vector<double> bins_hz;
  std::vector<int> k_indices;
  double reference_rate_hz = 44100.0;
  int fft_size = 256;

  std::size_t size() const noexcept { return bins_hz.size(); }
};

// Default: bins k = 1..92 of a 256-point FFT at 44.1 kHz (172 Hz .. 15.8 kHz).
FrequencyGrid make_frequency_grid(int n_bins = 92, int first_index = 1,
                                  double reference_rate_hz = 44100.0,
                                  int fft_size = 256);

// |DTFT| of every HRIR row evaluated at the grid frequencies, using the
// ear's own sample rate. Throws NumericError for bins at or above Nyquist.
Eigen::MatrixXd hrir_to_magnitude(const SubjectEar& ear, const FrequencyGrid& grid);

// Positive remainder modulo 360, in [0, 360).
double canonicalize_azimuth(double theta_deg);

// Right -> MirroredRight with theta' = 360 - theta; MirroredRight -> Right
// undoes it. Throws InvariantError for a left ear.
SubjectEar mirror_right_ear(const SubjectEar& ear);

// Training view: rows with azimuth in (0, band) are repeated at +360 and rows
// in (360 - band, 360) at -360. Copies are flagged in `wrapped`.
MagnitudeField extend_azimuth_wrap(const MagnitudeField& field, double band_deg = 30.0);

// Drops rows flagged as wrapped copies.
MagnitudeField strip_wrapped(const MagnitudeField& field);

struct EquatorRing {
  std::vector<std::size_t> ring_indices;
  std::vector<double> azimuths_deg;
  std::vector<double> delta_theta_deg;
};

// Directions with |elevation| <= tol_deg, sorted by azimuth, with circular
// Voronoi arc weights. Falls back to the lowest-|elevation| ring when nothing
// lies within tol_deg. Needs at least 3 distinct azimuths.
EquatorRing find_equator_ring(std::span<const Direction> directions,
                              double tol_deg = 2.5);

// Mean-square magnitude on the equator, weighted by the ring's arc lengths:
// (1 / (360 K)) * sum_ring sum_k H^2 * dtheta.
double equator_energy(const Eigen::MatrixXd& linear, const EquatorRing& ring);

// Divides every entry by sqrt(equator_energy). Throws NumericError when the
// equator carries no energy.
Eigen::MatrixXd normalize_equator(const Eigen::MatrixXd& linear, const EquatorRing& ring);

// 20 log10(max(x, 1e-6 * max(x))).
Eigen::MatrixXd to_db(const Eigen::MatrixXd& linear);

enum class NormalizationScope { PerEar, PerDatabase };

struct PreprocessOptions {
  FrequencyGrid grid = make_frequency_grid();
  double equator_tol_deg = 2.5;
  NormalizationScope scope = NormalizationScope::PerEar;
  bool mirror_right = true;
};

// Raw ear -> processed ear (mirroring, canonical azimuths, |DTFT|, equator
// normalization, dB). Per-database scope needs the whole archive, so it is
// only honoured by process_archive.
SubjectEar process_ear(const SubjectEar& raw, const PreprocessOptions& options = {});
std::vector<SubjectEar> process_archive(const DatasetArchive& archive,
                                        const PreprocessOptions& options = {});

}  // namespace hrtf_field
