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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include <Eigen/Geometry>

#include "hrtf_field/errors.hpp"
#include "hrtf_field/geometry.hpp"
#include "hrtf_field/random.hpp"
#include "hrtf_field/synthetic.hpp"

namespace hrtf_field {
namespace {

using Face = std::array<std::size_t, 3>;

Face sorted(Face f) {
  std::sort(f.begin(), f.end());
  return f;
}

// All triples whose plane has every other point strictly on one side.
std::set<Face> brute_force_hull(const std::vector<Eigen::Vector3d>& p) {
  std::set<Face> faces;
  const auto n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const Eigen::Vector3d nrm = (p[j] - p[i]).cross(p[k] - p[i]);
        int pos = 0, neg = 0;
        for (std::size_t m = 0; m < n; ++m) {
          if (m == i || m == j || m == k) continue;
          const double s = nrm.dot(p[m] - p[i]);
          if (s > 1e-12) ++pos;
          if (s < -1e-12) ++neg;
        }
        if (pos == 0 || neg == 0) faces.insert({i, j, k});
      }
    }
  }
  return faces;
}

TEST(UnitVector, AxisDirections) {
  EXPECT_TRUE(direction_to_unit_vector({0, 0, 1}).isApprox(Eigen::Vector3d(1, 0, 0)));
  EXPECT_TRUE(direction_to_unit_vector({90, 0, 1}).isApprox(Eigen::Vector3d(0, 1, 0)));
  EXPECT_NEAR((direction_to_unit_vector({33, 90, 1}) - Eigen::Vector3d(0, 0, 1)).norm(), 0, 1e-15);
  EXPECT_NEAR(direction_to_unit_vector({123, -47, 2}).norm(), 1.0, 1e-15);
}

TEST(Triangulation, MatchesBruteForceHull) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto dirs = synth::random_directions(30, seed);
    const auto tri = build_triangulation(dirs);
    std::set<Face> got;
    for (const auto& t : tri.triangles) got.insert(sorted(t));
    EXPECT_EQ(got, brute_force_hull(tri.points)) << "seed " << seed;
  }
}

TEST(Triangulation, EulerCharacteristicAndWinding) {
  const auto dirs = synth::random_directions(50, 9);
  const auto tri = build_triangulation(dirs);
  EXPECT_EQ(tri.hull_vertex_count(), 50u);
  EXPECT_EQ(tri.triangles.size(), 2u * 50 - 4);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& t : tri.triangles) {
    const auto& a = tri.points[t[0]];
    const auto& b = tri.points[t[1]];
    const auto& c = tri.points[t[2]];
    EXPECT_GT((b - a).cross(c - a).dot(a), 0.0);
    for (int e = 0; e < 3; ++e) {
      edges.insert(std::minmax(t[e], t[(e + 1) % 3]));
    }
  }
  // V - E + F = 2
  EXPECT_EQ(50 - static_cast<long>(edges.size()) + static_cast<long>(tri.triangles.size()), 2);
}

TEST(Triangulation, AdjacencyIsSymmetric) {
  const auto tri = build_triangulation(synth::random_directions(25, 3));
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const auto u = tri.adjacency[t][e];
      ASSERT_LT(u, tri.triangles.size());
      const auto& nb = tri.adjacency[u];
      EXPECT_NE(std::find(nb.begin(), nb.end(), t), nb.end());
      // The shared edge is the one opposite vertex e.
      const auto a = tri.triangles[t][(e + 1) % 3];
      const auto b = tri.triangles[t][(e + 2) % 3];
      const auto& ut = tri.triangles[u];
      EXPECT_NE(std::find(ut.begin(), ut.end(), a), ut.end());
      EXPECT_NE(std::find(ut.begin(), ut.end(), b), ut.end());
    }
  }
}

TEST(Triangulation, InverseBasesInvertVertexMatrices) {
  const auto tri = build_triangulation(synth::octahedral_grid());
  EXPECT_EQ(tri.triangles.size(), 8u);
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    Eigen::Matrix3d m;
    for (int c = 0; c < 3; ++c) m.col(c) = tri.points[tri.triangles[t][c]];
    EXPECT_TRUE((tri.inverse_bases[t] * m).isApprox(Eigen::Matrix3d::Identity(), 1e-12));
  }
}

TEST(Triangulation, IndependentOfInputOrder) {
  auto dirs = synth::uniform_ring_grid(5, 10, -60, 60);
  dirs.push_back({0, 90, 1});
  dirs.push_back({0, -90, 1});
  const auto a = build_triangulation(dirs);
  std::vector<std::size_t> perm(dirs.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(4);
  rng.shuffle(std::span(perm));
  std::vector<Direction> shuffled;
  for (auto i : perm) shuffled.push_back(dirs[i]);
  const auto b = build_triangulation(shuffled);
  std::set<Face> fa, fb;
  for (const auto& t : a.triangles) fa.insert(sorted(t));
  for (const auto& t : b.triangles) fb.insert(sorted({perm[t[0]], perm[t[1]], perm[t[2]]}));
  EXPECT_EQ(fa, fb);
}

TEST(Triangulation, PoleDuplicatesAreSkipped) {
  auto dirs = synth::uniform_ring_grid(2, 6, -30, 30);
  dirs.push_back({0, 90, 1});
  dirs.push_back({120, 90, 1});
  const auto tri = build_triangulation(dirs);
  EXPECT_EQ(tri.duplicates, std::vector<std::size_t>{13});
  EXPECT_EQ(tri.hull_vertex_count(), 13u);
  EXPECT_DOUBLE_EQ(tri.min_elevation_deg, -30.0);
  EXPECT_DOUBLE_EQ(tri.max_elevation_deg, 90.0);
}

TEST(Triangulation, DegenerateInputThrows) {
  const std::vector<Direction> three{{0, 0, 1}, {90, 0, 1}, {0, 90, 1}};
  EXPECT_THROW(build_triangulation(three), InvariantError);
  EXPECT_THROW(build_triangulation(synth::uniform_ring_grid(1, 12, 0, 0)), InvariantError);
}

}  // namespace
}  // namespace hrtf_field
