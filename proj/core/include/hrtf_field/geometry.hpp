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

#include "hrtf_field/hrtf_data.hpp"

namespace hrtf_field {

// x = cos(el) cos(az), y = cos(el) sin(az), z = sin(el).
Eigen::Vector3d direction_to_unit_vector(const Direction& d);

// Triangulated convex hull of measured directions on the unit sphere.
// Triangles index into the original direction list and are wound
// counterclockwise seen from outside.
struct SphericalTriangulation {
  std::vector<Eigen::Vector3d> points;
  std::vector<std::array<std::size_t, 3>> triangles;
  // adjacency[t][e] is the triangle across the edge opposite vertex e.
  std::vector<std::array<std::size_t, 3>> adjacency;
  // Inverse of the matrix whose columns are a triangle's vertices; zero for
  // triangles whose plane passes through the origin.
  std::vector<Eigen::Matrix3d> inverse_bases;
  // Original indices that coincide with an earlier direction (e.g. several
  // azimuths at a pole) and were left out of the hull.
  std::vector<std::size_t> duplicates;
  double min_elevation_deg = 0.0;
  double max_elevation_deg = 0.0;

  std::size_t hull_vertex_count() const;
};

// Faces of the 3D convex hull of the unit vectors. Throws InvariantError for
// fewer than 4 distinct directions or coplanar input. The result does not
// depend on the order of `directions`.
SphericalTriangulation build_triangulation(std::span<const Direction> directions);

}  // namespace hrtf_field
