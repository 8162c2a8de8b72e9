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

#include "hrtf_field/synthetic.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hrtf_field/errors.hpp"
#include "hrtf_field/geometry.hpp"

namespace hrtf_field::synth {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kSincHalfWidth = 16;

Direction from_unit(const Eigen::Vector3d& v, double distance_m) {
  double az = std::atan2(v.y(), v.x()) / kDeg;
  if (az < 0.0) az += 360.0;
  if (az >= 360.0) az -= 360.0;
  const double el = std::asin(std::clamp(v.z(), -1.0, 1.0)) / kDeg;
  return {az, el, distance_m};
}

// Hann-windowed sinc placed at a fractional delay.
void add_tap(Eigen::Ref<Eigen::RowVectorXf> h, double delay, double gain) {
  const int lo = static_cast<int>(std::floor(delay)) - kSincHalfWidth + 1;
  for (int n = std::max(lo, 0); n < std::min<int>(lo + 2 * kSincHalfWidth, static_cast<int>(h.size()));
       ++n) {
    const double x = n - delay;
    const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double win = 0.5 + 0.5 * std::cos(std::numbers::pi * x / kSincHalfWidth);
    h(n) += static_cast<float>(gain * sinc * win);
  }
}

}  // namespace

std::vector<Direction> ring_grid(std::span<const double> elevations_deg,
                                 std::span<const int> azimuth_counts, double distance_m) {
  if (elevations_deg.size() != azimuth_counts.size()) {
    throw InvariantError("ring_grid: one azimuth count per elevation");
  }
  std::vector<Direction> out;
  for (std::size_t r = 0; r < elevations_deg.size(); ++r) {
    const int m = azimuth_counts[r];
    if (m < 1) throw InvariantError("ring_grid: azimuth count must be >= 1");
    for (int j = 0; j < m; ++j) {
      out.push_back({360.0 * j / m, elevations_deg[r], distance_m});
    }
  }
  return out;
}

std::vector<Direction> uniform_ring_grid(int n_rings, int n_azimuths, double el_min_deg,
                                         double el_max_deg, double distance_m) {
  if (n_rings < 1 || n_azimuths < 1) throw InvariantError("uniform_ring_grid: empty grid");
  std::vector<double> els(static_cast<std::size_t>(n_rings));
  std::vector<int> counts(static_cast<std::size_t>(n_rings), n_azimuths);
  for (int r = 0; r < n_rings; ++r) {
    els[static_cast<std::size_t>(r)] =
        n_rings == 1 ? el_min_deg : el_min_deg + (el_max_deg - el_min_deg) * r / (n_rings - 1);
  }
  return ring_grid(els, counts, distance_m);
}

std::vector<Direction> random_directions(std::size_t n, std::uint64_t seed, double el_min_deg,
                                         double el_max_deg) {
  Rng rng(seed);
  const double z0 = std::sin(el_min_deg * kDeg);
  const double z1 = std::sin(el_max_deg * kDeg);
  std::vector<Direction> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = rng.uniform(z0, z1);
    const double az = rng.uniform(0.0, 360.0);
    out.push_back({az, std::asin(z) / kDeg, 1.0});
  }
  return out;
}

std::vector<Direction> interaural_grid() {
  std::vector<double> lateral{-80, -65, -55};
  for (int a = -45; a <= 45; a += 5) lateral.push_back(a);
  for (double a : {55.0, 65.0, 80.0}) lateral.push_back(a);
  std::vector<Direction> out;
  for (double a : lateral) {
    for (int k = 0; k < 50; ++k) {
      const double e = -45.0 + 5.625 * k;
      const Eigen::Vector3d v(std::cos(a * kDeg) * std::cos(e * kDeg), std::sin(a * kDeg),
                              std::cos(a * kDeg) * std::sin(e * kDeg));
      out.push_back(from_unit(v, 1.0));
    }
  }
  return out;
}

std::vector<Direction> octahedral_grid() {
  return {{0, 0, 1}, {90, 0, 1}, {180, 0, 1}, {270, 0, 1}, {0, 90, 1}, {0, -90, 1}};
}

MagnitudeField smooth_pattern_field(std::span<const Direction> directions,
                                    std::span<const double> freq_hz, std::uint64_t seed,
                                    int order, double amplitude_db) {
  if (order < 0) throw InvariantError("smooth_pattern_field: negative order");
  std::vector<std::array<int, 3>> powers;
  for (int a = 0; a <= order; ++a) {
    for (int b = 0; a + b <= order; ++b) {
      for (int c = 0; a + b + c <= order; ++c) powers.push_back({a, b, c});
    }
  }
  Rng rng(seed);
  const auto n_terms = powers.size();
  std::vector<double> base(n_terms), swing(n_terms), rate(n_terms), phase(n_terms);
  for (std::size_t j = 0; j < n_terms; ++j) {
    base[j] = rng.uniform(-1.0, 1.0);
    swing[j] = rng.uniform(-1.0, 1.0);
    rate[j] = rng.uniform(0.5, 2.0);
    phase[j] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  const double f_max = freq_hz.empty() ? 1.0 : std::max(freq_hz.back(), 1.0);

  MagnitudeField f;
  f.label = fmt::format("pattern-{}", seed);
  f.directions.assign(directions.begin(), directions.end());
  f.freq_grid_hz.assign(freq_hz.begin(), freq_hz.end());
  f.values_db.resize(static_cast<Eigen::Index>(directions.size()),
                     static_cast<Eigen::Index>(freq_hz.size()));
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const auto u = direction_to_unit_vector(directions[i]);
    for (std::size_t k = 0; k < freq_hz.size(); ++k) {
      const double s = freq_hz[k] / f_max;
      double v = 0.0;
      for (std::size_t j = 0; j < n_terms; ++j) {
        const double coef = base[j] + swing[j] * std::sin(2.0 * std::numbers::pi * rate[j] * s + phase[j]);
        v += coef * std::pow(u.x(), powers[j][0]) * std::pow(u.y(), powers[j][1]) *
             std::pow(u.z(), powers[j][2]);
      }
      f.values_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
    }
  }
  const double rms = std::sqrt(f.values_db.array().square().mean());
  if (rms > 0.0) f.values_db *= amplitude_db / rms;
  return f;
}

SubjectTraits random_traits(Rng& rng) {
  return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
}

HrirMatrix synth_hrirs(std::span<const Direction> directions, const SubjectTraits& traits,
                       Ear ear, double sample_rate_hz, int taps) {
  if (!(sample_rate_hz > 0.0) || taps < 1) throw InvariantError("synth_hrirs: bad rate or taps");
  if (ear == Ear::MirroredRight) throw InvariantError("synth_hrirs: raw ears only");
  SubjectTraits s = traits;
  const double side = ear == Ear::Left ? 1.0 : -1.0;
  if (ear == Ear::Right) {
    s[1] = std::clamp(s[1] + 0.1, -1.0, 1.0);
    s[2] = std::clamp(s[2] - 0.1, -1.0, 1.0);
  }
  // Delays are written in samples at 44.1 kHz and scaled to the actual rate.
  const double r = sample_rate_hz / 44100.0;
  HrirMatrix h = HrirMatrix::Zero(static_cast<Eigen::Index>(directions.size()), taps);
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const auto u = direction_to_unit_vector(directions[i]);
    const double x = u.x();
    const double y = side * u.y();
    const double z = u.z();
    const double d0 = r * (20.0 + 6.0 * (1.0 - y) * (1.0 + 0.1 * s[0]));
    const double g0 = std::exp(0.25 * y + 0.1 * z);
    auto row = h.row(static_cast<Eigen::Index>(i));
    add_tap(row, d0, g0);
    add_tap(row, d0 + r * (4.0 + 4.0 * z + 0.8 * s[1]), 0.45 * g0 * (1.0 + 0.1 * s[2]));
    add_tap(row, d0 + r * (9.0 + 5.0 * x + 1.0 * s[2]), 0.22 * g0 * (1.0 - 0.1 * s[0]));
    add_tap(row, d0 + r * (15.0 + 3.0 * z * x + 0.5 * s[0]), 0.10 * g0);
  }
  return h;
}

DatasetArchive make_archive(const DatasetSpec& spec) {
  if (spec.grid.empty()) throw InvariantError("make_archive: empty grid");
  if (spec.n_subjects < 1) throw InvariantError("make_archive: need a subject");
  DatasetArchive a;
  a.dataset_name = spec.name;
  a.sample_rate_hz = spec.sample_rate_hz;
  Rng rng(spec.seed);
  for (int s = 0; s < spec.n_subjects; ++s) {
    const auto traits = random_traits(rng);
    for (Ear ear : {Ear::Left, Ear::Right}) {
      if (ear == Ear::Right && !spec.both_ears) break;
      SubjectEar e;
      e.subject_id = fmt::format("s{:03d}", s);
      e.dataset_name = spec.name;
      e.ear = ear;
      e.sample_rate_hz = spec.sample_rate_hz;
      e.directions = spec.grid;
      e.stage = Stage::Raw;
      e.hrirs = synth_hrirs(spec.grid, traits, ear, spec.sample_rate_hz, spec.taps);
      a.subject_ears.push_back(std::move(e));
    }
  }
  return a;
}

std::vector<DatasetSpec> dataset_collection(int n_datasets, int subjects_per_dataset,
                                            std::uint64_t seed) {
  static constexpr double kRates[] = {44100.0, 48000.0, 96000.0};
  Rng rng(seed);
  std::vector<DatasetSpec> out;
  for (int d = 0; d < n_datasets; ++d) {
    DatasetSpec spec;
    spec.name = fmt::format("synth{:02d}", d);
    spec.sample_rate_hz = kRates[d % 3];
    spec.taps = spec.sample_rate_hz > 50000.0 ? 256 : 128;
    spec.n_subjects = subjects_per_dataset;
    spec.seed = rng.next();
    // Elevation ranges and spacings vary; every grid keeps a 0 degree ring.
    const double el_min = -30.0 - 10.0 * static_cast<double>(rng.index(4));
    const double el_max = 50.0 + 10.0 * static_cast<double>(rng.index(5));
    const double step = 10.0 + 5.0 * static_cast<double>(rng.index(2));
    const int n_az = 12 + 4 * static_cast<int>(rng.index(4));
    std::vector<double> els;
    for (double e = 0.0; e >= el_min - 1e-9; e -= step) els.insert(els.begin(), e);
    for (double e = step; e <= el_max + 1e-9; e += step) els.push_back(e);
    std::vector<int> counts(els.size(), n_az);
    spec.grid = ring_grid(els, counts);
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace hrtf_field::synth
