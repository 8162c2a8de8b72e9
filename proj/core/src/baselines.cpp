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

#include "hrtf_field/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "hrtf_field/errors.hpp"
#include "hrtf_field/preprocess.hpp"

namespace hrtf_field {

namespace {

constexpr double kGainEps = 1e-9;
constexpr double kElevationSlack = 1e-6;
constexpr std::size_t kMinRingSize = 5;

double db_to_linear(double db) { return std::pow(10.0, db / 20.0); }

double linear_to_db(double lin) {
  return 20.0 * std::log10(std::max(lin, std::numeric_limits<double>::min()));
}

// Weighted sum of rows in the requested domain, returned in dB.
template <std::size_t N>
Eigen::RowVectorXd combine(const Eigen::MatrixXd& db, const std::array<std::size_t, N>& rows,
                           const std::array<double, N>& w, InterpDomain domain) {
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(db.cols());
  if (domain == InterpDomain::Db) {
    for (std::size_t i = 0; i < N; ++i) {
      if (w[i] != 0.0) acc += w[i] * db.row(static_cast<Eigen::Index>(rows[i]));
    }
    return acc;
  }
  for (std::size_t i = 0; i < N; ++i) {
    if (w[i] == 0.0) continue;
    acc += w[i] * db.row(static_cast<Eigen::Index>(rows[i])).unaryExpr(&db_to_linear);
  }
  return acc.unaryExpr(&linear_to_db);
}

}  // namespace

std::size_t Interpolation::extrapolated_count() const {
  return static_cast<std::size_t>(std::count(extrapolated.begin(), extrapolated.end(), true));
}

VbapGains vbap_gains(const SphericalTriangulation& tri, const Eigen::Vector3d& target) {
  VbapGains best;
  double best_min = -std::numeric_limits<double>::infinity();
  bool found_inside = false;
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const auto& inv = tri.inverse_bases[t];
    if (inv.isZero(0.0)) continue;
    const Eigen::Vector3d g = inv * target;
    const double sum = g.sum();
    if (!(sum > 0.0)) continue;  // the cone on the opposite side
    const double lo = g.minCoeff() / sum;
    const bool inside = lo >= -kGainEps;
    if ((inside && !found_inside) || (inside == found_inside && lo > best_min)) {
      found_inside = found_inside || inside;
      best_min = lo;
      best.vertices = tri.triangles[t];
      best.gains = g;
    }
  }
  if (!std::isfinite(best_min)) {
    throw NumericError("vbap_gains: no triangle faces the target direction");
  }
  best.inside = found_inside;
  if (!found_inside) best.gains = best.gains.cwiseMax(0.0);
  best.gains /= best.gains.sum();
  return best;
}

Interpolation vbap_interpolate(const MagnitudeField& field, const SphericalTriangulation& tri,
                               std::span<const Direction> targets, InterpDomain domain) {
  if (tri.points.size() != field.rows()) {
    throw InvariantError("vbap_interpolate: triangulation was built for another grid");
  }
  Interpolation out;
  out.values_db.resize(static_cast<Eigen::Index>(targets.size()), field.values_db.cols());
  out.extrapolated.assign(targets.size(), false);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto g = vbap_gains(tri, direction_to_unit_vector(targets[i]));
    const double el = targets[i].elevation_deg;
    out.extrapolated[i] = !g.inside || el < tri.min_elevation_deg - kElevationSlack ||
                          el > tri.max_elevation_deg + kElevationSlack;
    out.values_db.row(static_cast<Eigen::Index>(i)) =
        combine<3>(field.values_db, g.vertices, {g.gains[0], g.gains[1], g.gains[2]}, domain);
  }
  return out;
}

RingGrid build_ring_grid(std::span<const Direction> directions, bool strict, double tol_deg) {
  if (directions.empty()) throw InvariantError("build_ring_grid: no directions");
  std::vector<std::size_t> order(directions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (directions[a].elevation_deg != directions[b].elevation_deg) {
      return directions[a].elevation_deg < directions[b].elevation_deg;
    }
    return a < b;
  });
  RingGrid grid;
  grid.tol_deg = tol_deg;
  for (auto i : order) {
    const double el = directions[i].elevation_deg;
    if (grid.rings.empty() || el - grid.rings.back().elevation_deg > tol_deg) {
      grid.rings.push_back({el, {}, {}});
    }
    grid.rings.back().indices.push_back(i);
  }
  for (auto& ring : grid.rings) {
    std::sort(ring.indices.begin(), ring.indices.end(), [&](std::size_t a, std::size_t b) {
      const double aa = canonicalize_azimuth(directions[a].azimuth_deg);
      const double ab = canonicalize_azimuth(directions[b].azimuth_deg);
      return aa != ab ? aa < ab : a < b;
    });
    for (auto i : ring.indices) ring.azimuths_deg.push_back(canonicalize_azimuth(directions[i].azimuth_deg));
  }
  if (strict) {
    // Rings that are too small to interpolate along azimuth. Poles are
    // legitimately single points.
    std::vector<std::size_t> sparse;
    for (const auto& ring : grid.rings) {
      if (ring.indices.size() >= kMinRingSize || std::abs(ring.elevation_deg) >= 90.0 - tol_deg) {
        continue;
      }
      sparse.insert(sparse.end(), ring.indices.begin(), ring.indices.end());
    }
    if (4 * sparse.size() > directions.size()) {
      std::string names;
      for (std::size_t i = 0; i < sparse.size() && i < 8; ++i) {
        const auto& d = directions[sparse[i]];
        names += fmt::format("{}#{} ({:g}, {:g})", i ? ", " : "", sparse[i], d.azimuth_deg,
                             d.elevation_deg);
      }
      throw GridStructureError(fmt::format(
          "grid is not made of constant-elevation rings: {} of {} directions share their "
          "elevation with fewer than {} others, e.g. {}{}",
          sparse.size(), directions.size(), kMinRingSize - 1, names,
          sparse.size() > 8 ? ", ..." : ""));
    }
  }
  return grid;
}

namespace {

// Two bounding azimuth nodes on a ring and the fractional offset between them.
struct RingNeighbors {
  std::size_t a0 = 0;
  std::size_t a1 = 0;
  double frac = 0.0;
};

RingNeighbors ring_neighbors(const RingGrid::Ring& ring, double az) {
  const auto m = ring.azimuths_deg.size();
  if (m == 1) return {ring.indices[0], ring.indices[0], 0.0};
  // First azimuth strictly greater than az; the lower neighbor precedes it.
  const auto it = std::upper_bound(ring.azimuths_deg.begin(), ring.azimuths_deg.end(), az);
  const auto hi = static_cast<std::size_t>(it - ring.azimuths_deg.begin()) % m;
  const auto lo = (hi + m - 1) % m;
  const double span = canonicalize_azimuth(ring.azimuths_deg[hi] - ring.azimuths_deg[lo]);
  const double off = canonicalize_azimuth(az - ring.azimuths_deg[lo]);
  const double frac = span > 0.0 ? off / span : 0.0;
  return {ring.indices[lo], ring.indices[hi], frac};
}

}  // namespace

BilinearWeights bilinear_weights(const RingGrid& grid, const Direction& target) {
  const double az = canonicalize_azimuth(target.azimuth_deg);
  const double el = target.elevation_deg;
  const auto& rings = grid.rings;
  BilinearWeights w;
  std::size_t lo = 0;
  std::size_t hi = 0;
  double c_el = 0.0;
  const double tol = grid.tol_deg;
  if (el <= rings.front().elevation_deg + tol) {
    w.clamped = el < rings.front().elevation_deg - kElevationSlack;
  } else if (el >= rings.back().elevation_deg - tol) {
    lo = hi = rings.size() - 1;
    w.clamped = el > rings.back().elevation_deg + kElevationSlack;
  } else {
    while (rings[hi].elevation_deg + tol < el) ++hi;
    if (std::abs(rings[hi].elevation_deg - el) <= tol) {
      lo = hi;
    } else {
      lo = hi - 1;
      c_el = (el - rings[lo].elevation_deg) / (rings[hi].elevation_deg - rings[lo].elevation_deg);
    }
  }
  const auto low = ring_neighbors(rings[lo], az);
  const auto up = ring_neighbors(rings[hi], az);
  w.nodes = {low.a0, low.a1, up.a0, up.a1};
  w.weights = {(1.0 - low.frac) * (1.0 - c_el), low.frac * (1.0 - c_el), (1.0 - up.frac) * c_el,
               up.frac * c_el};
  return w;
}

Interpolation bilinear_interpolate(const MagnitudeField& field, std::span<const Direction> targets,
                                   InterpDomain domain, bool strict) {
  const auto grid = build_ring_grid(field.directions, strict);
  Interpolation out;
  out.values_db.resize(static_cast<Eigen::Index>(targets.size()), field.values_db.cols());
  out.extrapolated.assign(targets.size(), false);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto w = bilinear_weights(grid, targets[i]);
    out.extrapolated[i] = w.clamped;
    out.values_db.row(static_cast<Eigen::Index>(i)) =
        combine<4>(field.values_db, w.nodes, w.weights, domain);
  }
  return out;
}

}  // namespace hrtf_field
