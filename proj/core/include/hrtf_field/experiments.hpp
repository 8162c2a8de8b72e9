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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hrtf_field/evaluation.hpp"
#include "hrtf_field/hrtf_data.hpp"
#include "hrtf_field/igon.hpp"
#include "hrtf_field/preprocess.hpp"
#include "hrtf_field/siren.hpp"

namespace hrtf_field {

// Processed ears of one dataset as fields over [0, 360).
struct FieldDataset {
  std::string name;
  std::vector<MagnitudeField> ears;
};

FieldDataset make_field_dataset(const DatasetArchive& archive,
                                const PreprocessOptions& options = {});

// Wrap-extended copies ready for train().
std::vector<MagnitudeField> training_fields(std::span<const MagnitudeField> ears);

struct ModelConfig {
  std::size_t hidden_dim = 2048;
  std::size_t n_hidden = 2;
  double omega0 = 30.0;
  TrainConfig train;

  SirenShape shape(std::size_t output_dim) const;
};

SirenNetwork init_model(const ModelConfig& cfg, std::size_t output_dim);

// Per-frequency LSD curves, one per method. Each curve is the mean over
// subject-ears of that ear's per-frequency LSD.
struct FrequencyCurves {
  std::vector<double> freq_hz;
  std::vector<std::string> methods;
  std::vector<std::vector<double>> lsd_db;

  const std::vector<double>& curve(std::string_view method) const;
};

struct InterpolationCurves {
  FrequencyCurves reconstruction;  // predicted at observed directions
  FrequencyCurves interpolation;   // predicted at desired directions
};

// The split is resolved on each ear's own grid.
InterpolationCurves evaluate_interpolation(std::span<const MagnitudeField> target_ears,
                                           const SplitSpec& split,
                                           std::span<const FieldPredictor* const> predictors);

enum class InterpSetting { OursR, OursT, OursE };
std::string to_string(InterpSetting setting);

// OursR: observed rows of the target. OursT: those plus every other dataset in
// full. OursE: the other datasets only. Returned fields are wrap-extended.
std::vector<MagnitudeField> interpolation_training_set(InterpSetting setting,
                                                       const FieldDataset& target,
                                                       std::span<const FieldDataset> others,
                                                       const SplitSpec& split);

struct InterpolationResult {
  SirenNetwork model;
  std::vector<EpochReport> history;
  InterpolationCurves curves;
};

// Trains a model for the setting unless `pretrained` is given, then compares it
// with VBAP and bilinear interpolation on the target dataset.
InterpolationResult run_interpolation_experiment(InterpSetting setting, const FieldDataset& target,
                                                 std::span<const FieldDataset> others,
                                                 const SplitSpec& split, const ModelConfig& cfg,
                                                 const SirenNetwork* pretrained = nullptr,
                                                 const EpochCallback& on_epoch = {});

struct CondGenConfig {
  std::vector<double> fractions{0.05, 0.10, 0.15, 0.20, 0.25};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
};

struct CondGenRow {
  double fraction = 0.0;
  std::string method;
  double mean_lsd_db = 0.0;  // NaN when every trial failed
  double std_lsd_db = 0.0;   // population std over successful trials
  std::size_t trials = 0;
  std::size_t failures = 0;
};

// Seed of the random observed subset for one (seed, ear) trial.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t ear_index);

// Every method sees the same observed subset in a trial. A method that throws
// on a trial (or whose check_grid rejects the ear) is counted as failed there.
std::vector<CondGenRow> run_conditional_generation(
    std::span<const FieldPredictor* const> predictors, std::span<const MagnitudeField> target_ears,
    const CondGenConfig& cfg = {});

// Polar angle p in [-90, 270]: p <= 90 is (0, p); beyond that (180, 180 - p).
Direction midsagittal_direction(double polar_deg);
std::vector<double> midsagittal_polar_angles(std::size_t n_points);
std::vector<Direction> midsagittal_path(std::size_t n_points = 361);

struct MorphResult {
  LatentCode z_a;
  LatentCode z_b;
  std::vector<double> ts;
  std::vector<MagnitudeField> fields;
};

// z_t = (1 - t) z_a + t z_b with both codes inferred from the full ears.
// An empty grid means the 1 degree midsagittal path.
MorphResult latent_morph(const SirenNetwork& net, const MagnitudeField& ear_a,
                         const MagnitudeField& ear_b, std::span<const double> ts,
                         std::span<const Direction> grid = {}, int latent_steps = 1);

struct MidsagittalTable {
  std::vector<double> polar_angle_deg;
  std::vector<double> freq_hz;
  Eigen::MatrixXd magnitude_db;  // n_points x K
};

MidsagittalTable export_midsagittal(const SirenNetwork& net, const LatentCode& z,
                                    std::span<const double> freq_hz, std::size_t n_points = 361);
// Measured data is sampled on the path by VBAP.
MidsagittalTable export_midsagittal(const MagnitudeField& field, std::size_t n_points = 361);

void write_curves_csv(const std::filesystem::path& path, const FrequencyCurves& curves);
void write_condgen_csv(const std::filesystem::path& path, std::span<const CondGenRow> rows);
void write_midsagittal_csv(const std::filesystem::path& path, const MidsagittalTable& table);
void write_field_csv(const std::filesystem::path& path, const MagnitudeField& field);

// Ordered key/value record of a run; the hash covers every entry.
class Manifest {
 public:
  void add(std::string key, std::string value);
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
    return entries_;
  }
  std::uint64_t config_hash() const;
  std::string text() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace hrtf_field
