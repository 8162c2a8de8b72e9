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

#include "hrtf_field/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "hrtf_field/errors.hpp"

namespace hrtf_field {

Eigen::Vector3d direction_to_unit_vector(const Direction& d) {
  const double az = d.azimuth_deg * std::numbers::pi / 180.0;
  const double el = d.elevation_deg * std::numbers::pi / 180.0;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

std::size_t SphericalTriangulation::hull_vertex_count() const {
  std::set<std::size_t> v;
  for (const auto& t : triangles) v.insert(t.begin(), t.end());
  return v.size();
}

namespace {

constexpr double kPlaneEps = 1e-10;
constexpr double kSameEps = 1e-12;

struct Face {
  std::array<std::size_t, 3> v;
  Eigen::Vector3d normal;
  double offset = 0.0;
  bool alive = true;

  double distance(const Eigen::Vector3d& p) const { return normal.dot(p) - offset; }
};

Face make_face(const std::vector<Eigen::Vector3d>& pts, std::size_t a, std::size_t b,
               std::size_t c, const Eigen::Vector3d& inside) {
  Face f;
  f.v = {a, b, c};
  f.normal = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
  const double n = f.normal.norm();
  if (n > 0.0) f.normal /= n;
  f.offset = f.normal.dot(pts[a]);
  if (f.distance(inside) > 0.0) {
    std::swap(f.v[1], f.v[2]);
    f.normal = -f.normal;
    f.offset = -f.offset;
  }
  return f;
}

}  // namespace

SphericalTriangulation build_triangulation(std::span<const Direction> directions) {
  SphericalTriangulation tri;
  const std::size_t n = directions.size();
  tri.points.reserve(n);
  for (const auto& d : directions) tri.points.push_back(direction_to_unit_vector(d));
  if (n > 0) {
    auto [lo, hi] = std::minmax_element(
        directions.begin(), directions.end(),
        [](const Direction& a, const Direction& b) { return a.elevation_deg < b.elevation_deg; });
    tri.min_elevation_deg = lo->elevation_deg;
    tri.max_elevation_deg = hi->elevation_deg;
  }

  // Canonical insertion order so the triangulation of coplanar patches does
  // not depend on how the caller ordered the list.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = tri.points[a];
    const auto& pb = tri.points[b];
    if (pa.z() != pb.z()) return pa.z() < pb.z();
    if (pa.y() != pb.y()) return pa.y() < pb.y();
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    return a < b;
  });
  std::vector<std::size_t> unique;
  for (auto i : order) {
    bool dup = false;
    for (auto j : unique) {
      if ((tri.points[i] - tri.points[j]).norm() < kSameEps) {
        dup = true;
        break;
      }
    }
    if (dup) {
      tri.duplicates.push_back(i);
    } else {
      unique.push_back(i);
    }
  }
  std::sort(tri.duplicates.begin(), tri.duplicates.end());
  if (unique.size() < 4) {
    throw InvariantError("build_triangulation: need at least 4 distinct directions");
  }
  const auto& P = tri.points;

  // Initial tetrahedron from extreme points.
  const std::size_t i0 = unique[0];
  std::size_t i1 = i0;
  double best = -1.0;
  for (auto i : unique) {
    const double d = (P[i] - P[i0]).squaredNorm();
    if (d > best) {
      best = d;
      i1 = i;
    }
  }
  std::size_t i2 = i0;
  best = -1.0;
  const Eigen::Vector3d axis = (P[i1] - P[i0]).normalized();
  for (auto i : unique) {
    const Eigen::Vector3d r = P[i] - P[i0];
    const double d = (r - axis * axis.dot(r)).squaredNorm();
    if (d > best) {
      best = d;
      i2 = i;
    }
  }
  const Eigen::Vector3d plane_n = (P[i1] - P[i0]).cross(P[i2] - P[i0]).normalized();
  std::size_t i3 = i0;
  best = -1.0;
  for (auto i : unique) {
    const double d = std::abs(plane_n.dot(P[i] - P[i0]));
    if (d > best) {
      best = d;
      i3 = i;
    }
  }
  if (!(best > kPlaneEps) || !plane_n.allFinite()) {
    throw InvariantError("build_triangulation: directions are coplanar");
  }

  const Eigen::Vector3d inside = (P[i0] + P[i1] + P[i2] + P[i3]) / 4.0;
  std::vector<Face> faces{make_face(P, i0, i1, i2, inside), make_face(P, i0, i1, i3, inside),
                          make_face(P, i0, i2, i3, inside), make_face(P, i1, i2, i3, inside)};

  for (auto p : unique) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    std::vector<std::size_t> visible;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].alive && faces[f].distance(P[p]) > kPlaneEps) visible.push_back(f);
    }
    if (visible.empty()) continue;  // inside or on the current hull
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (auto f : visible) {
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) edges.emplace(v[e], v[(e + 1) % 3]);
    }
    for (auto f : visible) faces[f].alive = false;
    for (const auto& [a, b] : edges) {
      if (edges.count({b, a})) continue;  // interior edge of the visible region
      faces.push_back(make_face(P, a, b, p, inside));
    }
  }

  for (const auto& f : faces) {
    if (f.alive) tri.triangles.push_back(f.v);
  }
  // Canonical triangle order as well.
  std::sort(tri.triangles.begin(), tri.triangles.end());

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_owner;
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const auto& v = tri.triangles[t];
    for (int e = 0; e < 3; ++e) edge_owner[{v[e], v[(e + 1) % 3]}] = t;
  }
  tri.adjacency.resize(tri.triangles.size());
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const auto& v = tri.triangles[t];
    for (int e = 0; e < 3; ++e) {
      // Edge opposite vertex e runs v[e+1] -> v[e+2]; its twin is reversed.
      const auto a = v[(e + 1) % 3];
      const auto b = v[(e + 2) % 3];
      const auto it = edge_owner.find({b, a});
      tri.adjacency[t][static_cast<std::size_t>(e)] = it == edge_owner.end() ? t : it->second;
    }
  }
  tri.inverse_bases.reserve(tri.triangles.size());
  for (const auto& v : tri.triangles) {
    Eigen::Matrix3d basis;
    basis << P[v[0]], P[v[1]], P[v[2]];
    const double det = basis.determinant();
    tri.inverse_bases.push_back(std::abs(det) > 1e-14 ? Eigen::Matrix3d(basis.inverse())
                                                      : Eigen::Matrix3d::Zero());
  }
  return tri;
}

}  // namespace hrtf_field
