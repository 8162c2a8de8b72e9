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

#include "hrtf_field/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "hrtf_field/errors.hpp"
#include "hrtf_field/geometry.hpp"
#include "hrtf_field/igon.hpp"
#include "hrtf_field/random.hpp"

namespace hrtf_field {

namespace {

LsdReport lsd_from_errors(const Eigen::MatrixXd& err) {
  if (err.size() == 0) throw InvariantError("lsd: empty field");
  if (!err.allFinite()) throw NumericError("lsd: non-finite error");
  LsdReport r;
  r.n_locations = static_cast<std::size_t>(err.rows());
  r.n_bins = static_cast<std::size_t>(err.cols());
  const Eigen::MatrixXd sq = err.array().square().matrix();
  r.overall_db = std::sqrt(sq.sum() / static_cast<double>(sq.size()));
  r.per_frequency_db.resize(r.n_bins);
  for (Eigen::Index k = 0; k < sq.cols(); ++k) {
    r.per_frequency_db[static_cast<std::size_t>(k)] = std::sqrt(sq.col(k).mean());
  }
  r.per_location_db.resize(r.n_locations);
  for (Eigen::Index l = 0; l < sq.rows(); ++l) {
    r.per_location_db[static_cast<std::size_t>(l)] = std::sqrt(sq.row(l).mean());
  }
  return r;
}

void check_shapes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvariantError(fmt::format("lsd: shape mismatch {}x{} vs {}x{}", a.rows(), a.cols(),
                                     b.rows(), b.cols()));
  }
}

double parse_double(std::string_view s, std::string_view what) {
  // std::from_chars for double is unavailable in some libstdc++ builds.
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw InvariantError(fmt::format("split: bad {} '{}'", what, s));
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view s, std::string_view what) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw InvariantError(fmt::format("split: bad {} '{}'", what, s));
  }
  return v;
}

}  // namespace

LsdReport lsd_db(const Eigen::MatrixXd& truth_db, const Eigen::MatrixXd& pred_db) {
  check_shapes(truth_db, pred_db);
  return lsd_from_errors(truth_db - pred_db);
}

LsdReport lsd_linear(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
  check_shapes(truth, pred);
  if (!(truth.array() > 0.0).all() || !(pred.array() > 0.0).all()) {
    throw NumericError("lsd: linear magnitudes must be positive");
  }
  return lsd_from_errors((20.0 * (truth.array() / pred.array()).log10()).matrix());
}

LsdReport lsd(const MagnitudeField& truth, const Eigen::MatrixXd& pred_db) {
  return lsd_db(truth.values_db, pred_db);
}

std::vector<std::size_t> SplitSpec::observed() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] == Role::Observed) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SplitSpec::desired() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] == Role::Desired) out.push_back(i);
  }
  return out;
}

SplitSpec make_split(std::span<const Direction> directions, SplitSpec spec) {
  const auto n = directions.size();
  if (n < 2) throw InvariantError("make_split: need at least 2 directions");
  spec.roles.assign(n, Role::Desired);
  switch (spec.strategy) {
    case SplitStrategy::Checkerboard: {
      const auto grid = build_ring_grid(directions, false);
      for (std::size_t r = 0; r < grid.rings.size(); ++r) {
        const auto& idx = grid.rings[r].indices;
        for (std::size_t j = 0; j < idx.size(); ++j) {
          spec.roles[idx[j]] = (j + r) % 2 == 0 ? Role::Observed : Role::Desired;
        }
      }
      break;
    }
    case SplitStrategy::RandomFraction: {
      if (!(spec.fraction > 0.0 && spec.fraction <= 1.0)) {
        throw InvariantError(fmt::format("make_split: fraction {} outside (0, 1]", spec.fraction));
      }
      const auto count = static_cast<std::size_t>(
          std::ceil(spec.fraction * static_cast<double>(n) - 1e-9));
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(spec.seed);
      rng.shuffle(std::span<std::size_t>(order));
      for (std::size_t i = 0; i < std::min(count, n); ++i) spec.roles[order[i]] = Role::Observed;
      break;
    }
    case SplitStrategy::AzimuthDecimation: {
      if (spec.decimation < 1) throw InvariantError("make_split: decimation must be >= 1");
      const auto grid = build_ring_grid(directions, false);
      const auto step = static_cast<std::size_t>(spec.decimation);
      for (const auto& ring : grid.rings) {
        for (std::size_t j = 0; j < ring.indices.size(); ++j) {
          if (j % step == 0) spec.roles[ring.indices[j]] = Role::Observed;
        }
      }
      break;
    }
  }
  if (std::none_of(spec.roles.begin(), spec.roles.end(),
                   [](Role r) { return r == Role::Observed; })) {
    throw InvariantError("make_split: no observed directions");
  }
  return spec;
}

SplitSpec parse_split(std::string_view text) {
  SplitSpec spec;
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  const auto kind = parts[0];
  if (kind == "checkerboard" && parts.size() == 1) {
    spec.strategy = SplitStrategy::Checkerboard;
  } else if (kind == "all" && parts.size() == 1) {
    spec.strategy = SplitStrategy::RandomFraction;
    spec.fraction = 1.0;
  } else if (kind == "random" && (parts.size() == 2 || parts.size() == 3)) {
    spec.strategy = SplitStrategy::RandomFraction;
    spec.fraction = parse_double(parts[1], "fraction");
    if (parts.size() == 3) spec.seed = parse_int<std::uint64_t>(parts[2], "seed");
  } else if (kind == "decimate" && parts.size() == 2) {
    spec.strategy = SplitStrategy::AzimuthDecimation;
    spec.decimation = parse_int<int>(parts[1], "decimation");
  } else {
    throw InvariantError(fmt::format(
        "unknown split '{}' (checkerboard, all, random:<p>[:<seed>], decimate:<n>)", text));
  }
  return spec;
}

std::string describe(const SplitSpec& spec) {
  switch (spec.strategy) {
    case SplitStrategy::Checkerboard:
      return "checkerboard";
    case SplitStrategy::RandomFraction:
      return fmt::format("random:{}:{}", spec.fraction, spec.seed);
    case SplitStrategy::AzimuthDecimation:
      return fmt::format("decimate:{}", spec.decimation);
  }
  return "?";
}

Eigen::MatrixXd NeuralFieldPredictor::predict(const MagnitudeField& observed,
                                              std::span<const Direction> targets) const {
  const auto z = infer_latent(net_, observed, latent_steps_);
  return hrtf_field::predict(net_, targets, z.values);
}

Eigen::MatrixXd VbapPredictor::predict(const MagnitudeField& observed,
                                       std::span<const Direction> targets) const {
  const auto tri = build_triangulation(observed.directions);
  return vbap_interpolate(observed, tri, targets, domain_).values_db;
}

Eigen::MatrixXd BilinearPredictor::predict(const MagnitudeField& observed,
                                           std::span<const Direction> targets) const {
  return bilinear_interpolate(observed, targets, domain_, false).values_db;
}

void BilinearPredictor::check_grid(std::span<const Direction> directions) const {
  (void)build_ring_grid(directions, true);
}

}  // namespace hrtf_field
