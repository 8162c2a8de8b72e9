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

#include "hrtf_field/experiments.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "hrtf_field/baselines.hpp"
#include "hrtf_field/errors.hpp"
#include "hrtf_field/geometry.hpp"
#include "hrtf_field/log.hpp"

namespace hrtf_field {

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void accumulate(std::vector<double>& acc, const std::vector<double>& v) {
  if (acc.empty()) acc.assign(v.size(), 0.0);
  for (std::size_t k = 0; k < v.size(); ++k) acc[k] += v[k];
}

}  // namespace

FieldDataset make_field_dataset(const DatasetArchive& archive, const PreprocessOptions& options) {
  FieldDataset ds;
  ds.name = archive.dataset_name;
  for (const auto& ear : process_archive(archive, options)) ds.ears.push_back(field_of(ear));
  return ds;
}

std::vector<MagnitudeField> training_fields(std::span<const MagnitudeField> ears) {
  std::vector<MagnitudeField> out;
  out.reserve(ears.size());
  for (const auto& e : ears) out.push_back(extend_azimuth_wrap(e));
  return out;
}

SirenShape ModelConfig::shape(std::size_t output_dim) const {
  SirenShape s;
  s.latent_dim = static_cast<std::size_t>(train.latent_dim);
  s.hidden_dim = hidden_dim;
  s.n_hidden = n_hidden;
  s.output_dim = output_dim;
  return s;
}

SirenNetwork init_model(const ModelConfig& cfg, std::size_t output_dim) {
  return siren_init(cfg.shape(output_dim), cfg.omega0, cfg.train.seed);
}

const std::vector<double>& FrequencyCurves::curve(std::string_view method) const {
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (methods[i] == method) return lsd_db[i];
  }
  throw InvariantError(fmt::format("no curve for method '{}'", method));
}

InterpolationCurves evaluate_interpolation(std::span<const MagnitudeField> target_ears,
                                           const SplitSpec& split,
                                           std::span<const FieldPredictor* const> predictors) {
  if (target_ears.empty()) throw InvariantError("evaluate_interpolation: no target ears");
  if (predictors.empty()) throw InvariantError("evaluate_interpolation: no methods");
  InterpolationCurves out;
  for (auto* curves : {&out.reconstruction, &out.interpolation}) {
    curves->freq_hz = target_ears.front().freq_grid_hz;
    for (const auto* p : predictors) curves->methods.push_back(p->name());
    curves->lsd_db.resize(predictors.size());
  }
  for (const auto& ear : target_ears) {
    if (ear.freq_grid_hz != out.reconstruction.freq_hz) {
      throw InvariantError("evaluate_interpolation: target ears use different frequency grids");
    }
    const auto resolved = make_split(ear.directions, split);
    const auto obs_rows = resolved.observed();
    const auto des_rows = resolved.desired();
    const auto observed = ear.select_rows(obs_rows);
    for (std::size_t m = 0; m < predictors.size(); ++m) {
      predictors[m]->check_grid(ear.directions);
      const auto recon = predictors[m]->predict(observed, observed.directions);
      accumulate(out.reconstruction.lsd_db[m], lsd(observed, recon).per_frequency_db);
      if (!des_rows.empty()) {
        const auto desired = ear.select_rows(des_rows);
        const auto interp = predictors[m]->predict(observed, desired.directions);
        accumulate(out.interpolation.lsd_db[m], lsd(desired, interp).per_frequency_db);
      }
    }
  }
  const double n = static_cast<double>(target_ears.size());
  for (auto* curves : {&out.reconstruction, &out.interpolation}) {
    for (auto& c : curves->lsd_db) {
      if (c.empty()) c.assign(curves->freq_hz.size(), 0.0);
      for (auto& v : c) v /= n;
    }
  }
  return out;
}

std::string to_string(InterpSetting setting) {
  switch (setting) {
    case InterpSetting::OursR:
      return "interp-r";
    case InterpSetting::OursT:
      return "interp-t";
    case InterpSetting::OursE:
      return "interp-e";
  }
  return "?";
}

std::vector<MagnitudeField> interpolation_training_set(InterpSetting setting,
                                                       const FieldDataset& target,
                                                       std::span<const FieldDataset> others,
                                                       const SplitSpec& split) {
  if (setting == InterpSetting::OursR && !others.empty()) {
    throw InvariantError("interp-r trains on the target dataset alone; drop the other datasets");
  }
  if (setting != InterpSetting::OursR && others.empty()) {
    throw InvariantError(fmt::format("{} needs at least one other dataset", to_string(setting)));
  }
  for (const auto& o : others) {
    if (o.name == target.name) {
      throw InvariantError(fmt::format("dataset '{}' is both target and other", o.name));
    }
  }
  std::vector<MagnitudeField> fields;
  if (setting != InterpSetting::OursE) {
    for (const auto& ear : target.ears) {
      const auto resolved = make_split(ear.directions, split);
      fields.push_back(ear.select_rows(resolved.observed()));
    }
  }
  if (setting != InterpSetting::OursR) {
    for (const auto& o : others) fields.insert(fields.end(), o.ears.begin(), o.ears.end());
  }
  return training_fields(fields);
}

InterpolationResult run_interpolation_experiment(InterpSetting setting, const FieldDataset& target,
                                                 std::span<const FieldDataset> others,
                                                 const SplitSpec& split, const ModelConfig& cfg,
                                                 const SirenNetwork* pretrained,
                                                 const EpochCallback& on_epoch) {
  if (target.ears.empty()) throw InvariantError("target dataset has no ears");
  InterpolationResult result;
  if (pretrained != nullptr) {
    validate(*pretrained);
    result.model = *pretrained;
  } else {
    const auto fields = interpolation_training_set(setting, target, others, split);
    auto trained = train(init_model(cfg, target.ears.front().bins()), fields, cfg.train, on_epoch);
    result.model = std::move(trained.network);
    result.history = std::move(trained.history);
  }
  const NeuralFieldPredictor field(result.model, cfg.train.latent_steps);
  const VbapPredictor vbap;
  const BilinearPredictor bilinear;
  const std::vector<const FieldPredictor*> predictors{&field, &vbap, &bilinear};
  result.curves = evaluate_interpolation(target.ears, split, predictors);
  return result;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t ear_index) {
  return seed ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(ear_index) + 1));
}

std::vector<CondGenRow> run_conditional_generation(
    std::span<const FieldPredictor* const> predictors, std::span<const MagnitudeField> target_ears,
    const CondGenConfig& cfg) {
  if (target_ears.empty()) throw InvariantError("conditional generation: no target ears");
  if (cfg.fractions.empty() || cfg.seeds.empty()) {
    throw InvariantError("conditional generation: need fractions and seeds");
  }
  for (double p : cfg.fractions) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw InvariantError(fmt::format("conditional generation: fraction {} outside (0, 1]", p));
    }
    if (p > 0.25) warn(fmt::format("fraction {} exceeds the sparse regime of at most 25%", p));
  }

  // Methods that cannot handle an ear's full grid fail every trial on it.
  std::vector<std::vector<bool>> usable(predictors.size(),
                                        std::vector<bool>(target_ears.size(), true));
  for (std::size_t m = 0; m < predictors.size(); ++m) {
    for (std::size_t e = 0; e < target_ears.size(); ++e) {
      try {
        predictors[m]->check_grid(target_ears[e].directions);
      } catch (const InvariantError& err) {
        usable[m][e] = false;
        warn(fmt::format("{} unusable on {}: {}", predictors[m]->name(), target_ears[e].label,
                         err.what()));
      }
    }
  }

  std::vector<CondGenRow> rows;
  for (double p : cfg.fractions) {
    std::vector<std::vector<double>> values(predictors.size());
    std::vector<std::size_t> failures(predictors.size(), 0);
    for (auto seed : cfg.seeds) {
      for (std::size_t e = 0; e < target_ears.size(); ++e) {
        const auto& ear = target_ears[e];
        SplitSpec spec;
        spec.strategy = SplitStrategy::RandomFraction;
        spec.fraction = p;
        spec.seed = trial_seed(seed, e);
        const auto resolved = make_split(ear.directions, spec);
        const auto des_rows = resolved.desired();
        if (des_rows.empty()) throw InvariantError("conditional generation: nothing held out");
        const auto observed = ear.select_rows(resolved.observed());
        const auto desired = ear.select_rows(des_rows);
        for (std::size_t m = 0; m < predictors.size(); ++m) {
          if (!usable[m][e]) {
            ++failures[m];
            continue;
          }
          try {
            const auto pred = predictors[m]->predict(observed, desired.directions);
            values[m].push_back(lsd(desired, pred).overall_db);
          } catch (const InvariantError&) {
            ++failures[m];
          } catch (const NumericError&) {
            ++failures[m];
          }
        }
      }
    }
    for (std::size_t m = 0; m < predictors.size(); ++m) {
      CondGenRow row;
      row.fraction = p;
      row.method = predictors[m]->name();
      row.failures = failures[m];
      row.trials = values[m].size() + failures[m];
      if (values[m].empty()) {
        row.mean_lsd_db = std::numeric_limits<double>::quiet_NaN();
        row.std_lsd_db = std::numeric_limits<double>::quiet_NaN();
      } else {
        double sum = 0.0;
        for (double v : values[m]) sum += v;
        row.mean_lsd_db = sum / static_cast<double>(values[m].size());
        double ss = 0.0;
        for (double v : values[m]) ss += (v - row.mean_lsd_db) * (v - row.mean_lsd_db);
        row.std_lsd_db = std::sqrt(ss / static_cast<double>(values[m].size()));
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

Direction midsagittal_direction(double polar_deg) {
  if (polar_deg < -90.0 || polar_deg > 270.0) {
    throw InvariantError(fmt::format("polar angle {} outside [-90, 270]", polar_deg));
  }
  if (polar_deg <= 90.0) return {0.0, polar_deg, 0.0};
  return {180.0, 180.0 - polar_deg, 0.0};
}

std::vector<double> midsagittal_polar_angles(std::size_t n_points) {
  if (n_points < 2) throw InvariantError("midsagittal path needs at least 2 points");
  std::vector<double> p(n_points);
  const double step = 360.0 / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) p[i] = -90.0 + step * static_cast<double>(i);
  p.back() = 270.0;
  return p;
}

std::vector<Direction> midsagittal_path(std::size_t n_points) {
  std::vector<Direction> path;
  for (double p : midsagittal_polar_angles(n_points)) path.push_back(midsagittal_direction(p));
  return path;
}

MorphResult latent_morph(const SirenNetwork& net, const MagnitudeField& ear_a,
                         const MagnitudeField& ear_b, std::span<const double> ts,
                         std::span<const Direction> grid, int latent_steps) {
  MorphResult out;
  out.z_a = infer_latent(net, ear_a, latent_steps);
  out.z_b = infer_latent(net, ear_b, latent_steps);
  out.ts.assign(ts.begin(), ts.end());
  std::vector<Direction> path;
  if (grid.empty()) {
    path = midsagittal_path();
  } else {
    path.assign(grid.begin(), grid.end());
  }
  for (double t : ts) {
    if (!std::isfinite(t)) throw NumericError("latent_morph: non-finite t");
    const Eigen::VectorXd z = (1.0 - t) * out.z_a.values + t * out.z_b.values;
    MagnitudeField f;
    f.label = fmt::format("morph t={}", t);
    f.directions = path;
    f.values_db = predict(net, path, z);
    f.freq_grid_hz = ear_a.freq_grid_hz;
    out.fields.push_back(std::move(f));
  }
  return out;
}

MidsagittalTable export_midsagittal(const SirenNetwork& net, const LatentCode& z,
                                    std::span<const double> freq_hz, std::size_t n_points) {
  if (freq_hz.size() != net.output_dim()) {
    throw InvariantError(fmt::format("export_midsagittal: {} frequencies for {} outputs",
                                     freq_hz.size(), net.output_dim()));
  }
  MidsagittalTable t;
  t.polar_angle_deg = midsagittal_polar_angles(n_points);
  t.freq_hz.assign(freq_hz.begin(), freq_hz.end());
  t.magnitude_db = predict(net, midsagittal_path(n_points), z.values);
  return t;
}

MidsagittalTable export_midsagittal(const MagnitudeField& field, std::size_t n_points) {
  MidsagittalTable t;
  t.polar_angle_deg = midsagittal_polar_angles(n_points);
  t.freq_hz = field.freq_grid_hz;
  const auto tri = build_triangulation(field.directions);
  t.magnitude_db = vbap_interpolate(field, tri, midsagittal_path(n_points)).values_db;
  return t;
}

void write_curves_csv(const std::filesystem::path& path, const FrequencyCurves& curves) {
  auto out = open_csv(path);
  out << "freq_hz";
  for (const auto& m : curves.methods) out << ',' << m;
  out << '\n';
  for (std::size_t k = 0; k < curves.freq_hz.size(); ++k) {
    out << fmt::format("{}", curves.freq_hz[k]);
    for (const auto& c : curves.lsd_db) out << fmt::format(",{}", c[k]);
    out << '\n';
  }
  finish(out, path);
}

void write_condgen_csv(const std::filesystem::path& path, std::span<const CondGenRow> rows) {
  auto out = open_csv(path);
  out << "fraction,method,mean_lsd_db,std_lsd_db,trials,failures\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{}\n", r.fraction, r.method, r.mean_lsd_db, r.std_lsd_db,
                       r.trials, r.failures);
  }
  finish(out, path);
}

void write_midsagittal_csv(const std::filesystem::path& path, const MidsagittalTable& table) {
  auto out = open_csv(path);
  out << "polar_angle_deg";
  for (double f : table.freq_hz) out << fmt::format(",{}", f);
  out << '\n';
  for (std::size_t i = 0; i < table.polar_angle_deg.size(); ++i) {
    out << fmt::format("{}", table.polar_angle_deg[i]);
    for (Eigen::Index k = 0; k < table.magnitude_db.cols(); ++k) {
      out << fmt::format(",{}", table.magnitude_db(static_cast<Eigen::Index>(i), k));
    }
    out << '\n';
  }
  finish(out, path);
}

void write_field_csv(const std::filesystem::path& path, const MagnitudeField& field) {
  auto out = open_csv(path);
  out << "azimuth_deg,elevation_deg";
  for (double f : field.freq_grid_hz) out << fmt::format(",{}", f);
  out << '\n';
  for (std::size_t i = 0; i < field.rows(); ++i) {
    out << fmt::format("{},{}", field.directions[i].azimuth_deg,
                       field.directions[i].elevation_deg);
    for (Eigen::Index k = 0; k < field.values_db.cols(); ++k) {
      out << fmt::format(",{}", field.values_db(static_cast<Eigen::Index>(i), k));
    }
    out << '\n';
  }
  finish(out, path);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void Manifest::add(std::string key, std::string value) {
  entries_.emplace_back(std::move(key), std::move(value));
}

std::uint64_t Manifest::config_hash() const {
  std::string body;
  for (const auto& [k, v] : entries_) body += k + '=' + v + '\n';
  return fnv1a64(body);
}

std::string Manifest::text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + '=' + v + '\n';
  out += fmt::format("config_hash={:016x}\n", config_hash());
  return out;
}

void Manifest::write(const std::filesystem::path& path) const {
  auto out = open_csv(path);
  out << text();
  finish(out, path);
}

}  // namespace hrtf_field
