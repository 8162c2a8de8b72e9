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
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hrtf_field/baselines.hpp"
#include "hrtf_field/hrtf_data.hpp"
#include "hrtf_field/siren.hpp"

namespace hrtf_field {

// Log-spectral distortion with its per-bin and per-location marginals.
// overall^2 is the mean of the squared dB errors over all cells.
struct LsdReport {
  double overall_db = 0.0;
  std::vector<double> per_frequency_db;
  std::vector<double> per_location_db;
  std::size_t n_locations = 0;
  std::size_t n_bins = 0;
};

// Both inputs already in dB; errors are plain differences.
LsdReport lsd_db(const Eigen::MatrixXd& truth_db, const Eigen::MatrixXd& pred_db);
// Linear magnitudes; errors are 20 log10(truth / pred). Entries must be > 0.
LsdReport lsd_linear(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred);
LsdReport lsd(const MagnitudeField& truth, const Eigen::MatrixXd& pred_db);

enum class SplitStrategy { Checkerboard, RandomFraction, AzimuthDecimation };
enum class Role : std::uint8_t { Observed, Desired };

// How directions are divided into observed inputs and desired (held-out)
// outputs. `roles` is filled by make_split.
struct SplitSpec {
  SplitStrategy strategy = SplitStrategy::Checkerboard;
  double fraction = 0.5;     // RandomFraction
  std::uint64_t seed = 0;    // RandomFraction
  int decimation = 2;        // AzimuthDecimation: every n-th azimuth observed
  std::vector<Role> roles;

  std::vector<std::size_t> observed() const;
  std::vector<std::size_t> desired() const;
};

// Checkerboard alternates roles along azimuth within each elevation ring and
// offsets alternate rings. RandomFraction observes ceil(fraction * L)
// directions. Throws InvariantError when nothing would be observed.
SplitSpec make_split(std::span<const Direction> directions, SplitSpec spec);

// "checkerboard", "random:<p>[:<seed>]", "decimate:<n>", "all".
SplitSpec parse_split(std::string_view text);
std::string describe(const SplitSpec& spec);

// Predicts one subject-ear's magnitudes at arbitrary directions from a set of
// observed rows.
class FieldPredictor {
 public:
  virtual ~FieldPredictor() = default;
  virtual std::string name() const = 0;
  virtual Eigen::MatrixXd predict(const MagnitudeField& observed,
                                  std::span<const Direction> targets) const = 0;
  // Called once with an ear's complete grid before any of its subsets are
  // used; throws if the method cannot work on that grid at all.
  virtual void check_grid(std::span<const Direction>) const {}
};

// Latent inferred from the observed rows, then G(., ., z) at the targets.
class NeuralFieldPredictor final : public FieldPredictor {
 public:
  explicit NeuralFieldPredictor(SirenNetwork net, int latent_steps = 1)
      : net_(std::move(net)), latent_steps_(latent_steps) {}
  std::string name() const override { return "field"; }
  Eigen::MatrixXd predict(const MagnitudeField& observed,
                          std::span<const Direction> targets) const override;
  const SirenNetwork& network() const noexcept { return net_; }

 private:
  SirenNetwork net_;
  int latent_steps_;
};

class VbapPredictor final : public FieldPredictor {
 public:
  explicit VbapPredictor(InterpDomain domain = InterpDomain::Linear) : domain_(domain) {}
  std::string name() const override { return "vbap"; }
  Eigen::MatrixXd predict(const MagnitudeField& observed,
                          std::span<const Direction> targets) const override;

 private:
  InterpDomain domain_;
};

// Observed subsets of a ring grid are interpolated leniently; the full grid is
// checked for ring structure in check_grid.
class BilinearPredictor final : public FieldPredictor {
 public:
  explicit BilinearPredictor(InterpDomain domain = InterpDomain::Linear) : domain_(domain) {}
  std::string name() const override { return "bilinear"; }
  Eigen::MatrixXd predict(const MagnitudeField& observed,
                          std::span<const Direction> targets) const override;
  void check_grid(std::span<const Direction> directions) const override;

 private:
  InterpDomain domain_;
};

}  // namespace hrtf_field
