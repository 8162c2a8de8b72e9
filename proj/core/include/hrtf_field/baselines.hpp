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
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hrtf_field/geometry.hpp"
#include "hrtf_field/hrtf_data.hpp"

namespace hrtf_field {

// Domain in which neighbor rows are combined. Output is always dB.
enum class InterpDomain { Linear, Db };

struct Interpolation {
  Eigen::MatrixXd values_db;
  // Targets outside the measured coverage (elevation range of the grid or no
  // enclosing triangle); their rows are extrapolated.
  std::vector<bool> extrapolated;

  std::size_t extrapolated_count() const;
};

struct VbapGains {
  std::array<std::size_t, 3> vertices{};
  Eigen::Vector3d gains = Eigen::Vector3d::Zero();  // sum to 1
  bool inside = true;
};

// Gains of the triangle enclosing `target`. Falls back to the triangle with
// the least negative gain (negatives clamped) when none encloses it.
VbapGains vbap_gains(const SphericalTriangulation& tri, const Eigen::Vector3d& target);

// VBAP over the triangulation of field.directions.
Interpolation vbap_interpolate(const MagnitudeField& field, const SphericalTriangulation& tri,
                               std::span<const Direction> targets,
                               InterpDomain domain = InterpDomain::Linear);

// Directions grouped by constant elevation.
struct RingGrid {
  struct Ring {
    double elevation_deg = 0.0;
    std::vector<std::size_t> indices;  // sorted by azimuth
    std::vector<double> azimuths_deg;  // canonical, ascending
  };
  std::vector<Ring> rings;  // ascending elevation
  double tol_deg = 1e-3;
};

// Groups directions into elevation rings (tolerance in degrees). With
// `strict`, a grid where more than a quarter of the directions sit on
// non-polar rings of fewer than five points is rejected with
// GridStructureError naming those directions.
RingGrid build_ring_grid(std::span<const Direction> directions, bool strict = true,
                         double tol_deg = 1e-3);

struct BilinearWeights {
  std::array<std::size_t, 4> nodes{};  // lower ring (a0, a1), upper ring (a0, a1)
  std::array<double, 4> weights{};
  bool clamped = false;
};

BilinearWeights bilinear_weights(const RingGrid& grid, const Direction& target);

// Four-neighbor interpolation between the two bounding rings and, on each
// ring, the two bounding azimuths.
Interpolation bilinear_interpolate(const MagnitudeField& field, std::span<const Direction> targets,
                                   InterpDomain domain = InterpDomain::Linear,
                                   bool strict = true);

}  // namespace hrtf_field
