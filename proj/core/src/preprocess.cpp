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

#include "hrtf_field/preprocess.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "hrtf_field/errors.hpp"

namespace hrtf_field {

FrequencyGrid make_frequency_grid(int n_bins, int first_index, double reference_rate_hz,
                                  int fft_size) {
  if (n_bins < 1 || first_index < 0 || fft_size < 1 || !(reference_rate_hz > 0.0)) {
    throw InvariantError("invalid frequency grid parameters");
  }
  FrequencyGrid g;
  g.reference_rate_hz = reference_rate_hz;
  g.fft_size = fft_size;
  for (int i = 0; i < n_bins; ++i) {
    const int k = first_index + i;
    g.k_indices.push_back(k);
    g.bins_hz.push_back(k * reference_rate_hz / fft_size);
  }
  return g;
}

Eigen::MatrixXd hrir_to_magnitude(const SubjectEar& ear, const FrequencyGrid& grid) {
  if (ear.stage != Stage::Raw) {
    throw InvariantError(ear.key() + ": hrir_to_magnitude needs raw HRIRs");
  }
  const auto T = ear.hrirs.cols();
  if (T < 1) throw InvariantError(ear.key() + ": empty HRIRs");
  const auto K = static_cast<Eigen::Index>(grid.size());
  const double fs = ear.sample_rate_hz;
  Eigen::MatrixXd cos_t(T, K), sin_t(T, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double f = grid.bins_hz[static_cast<std::size_t>(k)];
    if (f >= fs / 2.0) {
      throw NumericError(fmt::format("{}: bin {} Hz is at or above Nyquist ({} Hz)",
                                     ear.key(), f, fs / 2.0));
    }
    const double w = 2.0 * std::numbers::pi * f / fs;
    for (Eigen::Index n = 0; n < T; ++n) {
      const double phase = w * static_cast<double>(n);
      cos_t(n, k) = std::cos(phase);
      sin_t(n, k) = std::sin(phase);
    }
  }
  const Eigen::MatrixXd h = ear.hrirs.cast<double>();
  const Eigen::MatrixXd re = h * cos_t;
  const Eigen::MatrixXd im = h * sin_t;
  return (re.array().square() + im.array().square()).sqrt().matrix();
}

double canonicalize_azimuth(double theta_deg) {
  double r = std::fmod(theta_deg, 360.0);
  if (r < 0.0) r += 360.0;
  // fmod of a tiny negative value can round up to exactly 360.
  if (r >= 360.0) r -= 360.0;
  return r;
}

SubjectEar mirror_right_ear(const SubjectEar& ear) {
  if (ear.ear == Ear::Left) {
    throw InvariantError(ear.key() + ": mirror_right_ear called on a left ear");
  }
  SubjectEar out = ear;
  out.ear = ear.ear == Ear::Right ? Ear::MirroredRight : Ear::Right;
  for (auto& d : out.directions) d.azimuth_deg = canonicalize_azimuth(360.0 - d.azimuth_deg);
  return out;
}

MagnitudeField extend_azimuth_wrap(const MagnitudeField& field, double band_deg) {
  MagnitudeField out = field;
  if (out.wrapped.empty()) out.wrapped.assign(out.rows(), false);
  std::vector<std::size_t> src;
  std::vector<double> shift;
  for (std::size_t i = 0; i < field.rows(); ++i) {
    if (field.is_wrapped(i)) continue;
    const double az = field.directions[i].azimuth_deg;
    if (az > 0.0 && az < band_deg) {
      src.push_back(i);
      shift.push_back(360.0);
    } else if (az > 360.0 - band_deg && az < 360.0) {
      src.push_back(i);
      shift.push_back(-360.0);
    }
  }
  const auto L = static_cast<Eigen::Index>(field.rows());
  out.values_db.conservativeResize(L + static_cast<Eigen::Index>(src.size()), Eigen::NoChange);
  for (std::size_t j = 0; j < src.size(); ++j) {
    Direction d = field.directions[src[j]];
    d.azimuth_deg += shift[j];
    out.directions.push_back(d);
    out.wrapped.push_back(true);
    out.values_db.row(L + static_cast<Eigen::Index>(j)) =
        field.values_db.row(static_cast<Eigen::Index>(src[j]));
  }
  return out;
}

MagnitudeField strip_wrapped(const MagnitudeField& field) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < field.rows(); ++i) {
    if (!field.is_wrapped(i)) keep.push_back(i);
  }
  MagnitudeField out = field.select_rows(keep);
  out.wrapped.clear();
  return out;
}

EquatorRing find_equator_ring(std::span<const Direction> directions, double tol_deg) {
  if (directions.empty()) throw InvariantError("find_equator_ring: no directions");
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    if (std::abs(directions[i].elevation_deg) <= tol_deg) cand.push_back(i);
  }
  if (cand.empty()) {
    double best = 90.0;
    for (const auto& d : directions) best = std::min(best, std::abs(d.elevation_deg));
    for (std::size_t i = 0; i < directions.size(); ++i) {
      if (std::abs(std::abs(directions[i].elevation_deg) - best) <= 1e-9) cand.push_back(i);
    }
  }
  // One entry per azimuth: the point closest to the equator wins.
  std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
    const double aa = canonicalize_azimuth(directions[a].azimuth_deg);
    const double ab = canonicalize_azimuth(directions[b].azimuth_deg);
    if (aa != ab) return aa < ab;
    const double ea = std::abs(directions[a].elevation_deg);
    const double eb = std::abs(directions[b].elevation_deg);
    if (ea != eb) return ea < eb;
    return a < b;
  });
  EquatorRing ring;
  for (auto i : cand) {
    const double az = canonicalize_azimuth(directions[i].azimuth_deg);
    if (!ring.azimuths_deg.empty() && ring.azimuths_deg.back() == az) continue;
    ring.ring_indices.push_back(i);
    ring.azimuths_deg.push_back(az);
  }
  const auto m = ring.azimuths_deg.size();
  if (m < 3) {
    throw InvariantError(fmt::format("equator ring has {} distinct azimuths, need 3", m));
  }
  ring.delta_theta_deg.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double next = ring.azimuths_deg[(i + 1) % m];
    const double prev = ring.azimuths_deg[(i + m - 1) % m];
    const double gap_up = canonicalize_azimuth(next - ring.azimuths_deg[i]);
    const double gap_down = canonicalize_azimuth(ring.azimuths_deg[i] - prev);
    ring.delta_theta_deg[i] = 0.5 * (gap_up + gap_down);
  }
  return ring;
}

double equator_energy(const Eigen::MatrixXd& linear, const EquatorRing& ring) {
  const double K = static_cast<double>(linear.cols());
  double acc = 0.0;
  for (std::size_t j = 0; j < ring.ring_indices.size(); ++j) {
    const auto row = static_cast<Eigen::Index>(ring.ring_indices[j]);
    if (row >= linear.rows()) throw InvariantError("equator ring index out of range");
    acc += linear.row(row).squaredNorm() * ring.delta_theta_deg[j];
  }
  return acc / (360.0 * K);
}

Eigen::MatrixXd normalize_equator(const Eigen::MatrixXd& linear, const EquatorRing& ring) {
  const double e = equator_energy(linear, ring);
  if (!(e > 0.0) || !std::isfinite(e)) {
    throw NumericError("equator energy is zero or not finite");
  }
  return linear / std::sqrt(e);
}

Eigen::MatrixXd to_db(const Eigen::MatrixXd& linear) {
  const double peak = linear.size() > 0 ? linear.maxCoeff() : 0.0;
  double floor = 1e-6 * peak;
  if (!(floor > 0.0)) floor = std::numeric_limits<double>::min();
  return linear.unaryExpr([floor](double x) { return 20.0 * std::log10(std::max(x, floor)); });
}

namespace {

SubjectEar canonical_raw(const SubjectEar& raw, const PreprocessOptions& options) {
  SubjectEar ear = (options.mirror_right && raw.ear == Ear::Right) ? mirror_right_ear(raw) : raw;
  for (auto& d : ear.directions) d.azimuth_deg = canonicalize_azimuth(d.azimuth_deg);
  return ear;
}

SubjectEar finish(const SubjectEar& ear, Eigen::MatrixXd linear_normalized,
                  const FrequencyGrid& grid) {
  SubjectEar out;
  out.subject_id = ear.subject_id;
  out.dataset_name = ear.dataset_name;
  out.ear = ear.ear;
  out.sample_rate_hz = ear.sample_rate_hz;
  out.directions = ear.directions;
  out.stage = Stage::Processed;
  out.magnitudes_db = to_db(linear_normalized);
  out.freq_grid_hz = grid.bins_hz;
  return out;
}

}  // namespace

SubjectEar process_ear(const SubjectEar& raw, const PreprocessOptions& options) {
  validate(raw);
  const SubjectEar ear = canonical_raw(raw, options);
  const Eigen::MatrixXd lin = hrir_to_magnitude(ear, options.grid);
  const auto ring = find_equator_ring(ear.directions, options.equator_tol_deg);
  return finish(ear, normalize_equator(lin, ring), options.grid);
}

std::vector<SubjectEar> process_archive(const DatasetArchive& archive,
                                        const PreprocessOptions& options) {
  validate(archive);
  std::vector<SubjectEar> out;
  out.reserve(archive.subject_ears.size());
  if (options.scope == NormalizationScope::PerEar) {
    for (const auto& ear : archive.subject_ears) out.push_back(process_ear(ear, options));
    return out;
  }
  std::vector<SubjectEar> canon;
  std::vector<Eigen::MatrixXd> lin;
  double energy = 0.0;
  for (const auto& raw : archive.subject_ears) {
    canon.push_back(canonical_raw(raw, options));
    lin.push_back(hrir_to_magnitude(canon.back(), options.grid));
    energy += equator_energy(lin.back(),
                             find_equator_ring(canon.back().directions, options.equator_tol_deg));
  }
  energy /= static_cast<double>(canon.size());
  if (!(energy > 0.0) || !std::isfinite(energy)) {
    throw NumericError(archive.dataset_name + ": database equator energy is zero");
  }
  const double scale = 1.0 / std::sqrt(energy);
  for (std::size_t i = 0; i < canon.size(); ++i) {
    out.push_back(finish(canon[i], lin[i] * scale, options.grid));
  }
  return out;
}

}  // namespace hrtf_field
