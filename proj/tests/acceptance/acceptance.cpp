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

// Acceptance checks A1 to A10. Prints one PASS/FAIL line per criterion and
// exits nonzero when any fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hrtf_field/archive.hpp"
#include "hrtf_field/baselines.hpp"
#include "hrtf_field/evaluation.hpp"
#include "hrtf_field/experiments.hpp"
#include "hrtf_field/igon.hpp"
#include "hrtf_field/preprocess.hpp"
#include "hrtf_field/random.hpp"
#include "hrtf_field/siren.hpp"
#include "hrtf_field/synthetic.hpp"

namespace fs = std::filesystem;
using namespace hrtf_field;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ||a - b|| / max(||a||, ||b||), over every entry of every tensor.
struct RelError {
  double diff2 = 0.0;
  double a2 = 0.0;
  double b2 = 0.0;
  void add(double a, double b) {
    diff2 += (a - b) * (a - b);
    a2 += a * a;
    b2 += b * b;
  }
  double value() const {
    const double scale = std::sqrt(std::max(a2, b2));
    return scale > 0.0 ? std::sqrt(diff2) / scale : 0.0;
  }
};

SirenNetwork random_net(Rng& rng, std::uint64_t seed) {
  SirenShape s;
  s.latent_dim = 1 + rng.index(4);
  s.hidden_dim = 2 + rng.index(7);
  s.n_hidden = 1 + rng.index(2);
  s.output_dim = 1 + rng.index(8);
  return siren_init(s, 30.0, seed);
}

MagnitudeField random_field(Rng& rng, std::size_t bins, std::uint64_t seed) {
  const auto dirs = synth::random_directions(3 + rng.index(6), seed, -80, 80);
  std::vector<double> f;
  for (std::size_t k = 0; k < bins; ++k) f.push_back(300.0 * (k + 1));
  return synth::smooth_pattern_field(dirs, f, seed, 3, 2.0);
}

double field_loss(const SirenNetwork& net, const MagnitudeField& field, const Eigen::VectorXd& z) {
  return masked_mse(predict(net, field.directions, z), field.values_db,
                    std::vector<std::uint8_t>(field.rows(), 1));
}

Outcome a1_gradients() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  const double h = 1e-6;
  for (int n = 0; n < 20; ++n) {
    const auto net = random_net(rng, 1000 + n);
    const auto field = random_field(rng, net.output_dim(), 2000 + n);
    const auto obs = make_observations<double>(field);
    Eigen::VectorXd z(net.latent_dim);
    for (auto& v : z) v = rng.uniform(-0.2, 0.2);
    const auto gp = grad_params(net, obs, z);
    RelError e;
    for (std::size_t t = 0; t < gp.tensors.size(); ++t) {
      for (Eigen::Index k = 0; k < gp.tensors[t].size(); ++k) {
        auto p = net, m = net;
        p.parameter_refs()[t]->data()[k] += h;
        m.parameter_refs()[t]->data()[k] -= h;
        e.add(gp.tensors[t].data()[k], (field_loss(p, field, z) - field_loss(m, field, z)) / (2 * h));
      }
    }
    const auto gz = grad_latent(net, obs, z);
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      Eigen::VectorXd p = z, m = z;
      p[k] += h;
      m[k] -= h;
      e.add(gz.gradient[k], (field_loss(net, field, p) - field_loss(net, field, m)) / (2 * h));
    }
    worst = std::max(worst, e.value());
  }
  const double t = seconds_since(t0);
  return {worst < 1e-6 && t < 10.0,
          fmt::format("worst relative error {:.3g} over 20 nets, {:.1f} s", worst, t)};
}

Outcome a2_exact_mode() {
  const auto t0 = Clock::now();
  Rng rng(202);
  double worst = 0.0;
  const double h = 1e-6;
  for (int n = 0; n < 10; ++n) {
    const auto net = random_net(rng, 3000 + n);
    const auto field = random_field(rng, net.output_dim(), 4000 + n);
    const auto obs = make_observations<double>(field);
    const auto composed = [&](const SirenNetwork& w) {
      return field_loss(w, field, infer_latent(w, field, 1).values);
    };
    const auto g = grad_params_through_latent_step(net, obs, 1);
    RelError e;
    for (std::size_t t = 0; t < g.params.tensors.size(); ++t) {
      for (Eigen::Index k = 0; k < g.params.tensors[t].size(); ++k) {
        auto p = net, m = net;
        p.parameter_refs()[t]->data()[k] += h;
        m.parameter_refs()[t]->data()[k] -= h;
        e.add(g.params.tensors[t].data()[k], (composed(p) - composed(m)) / (2 * h));
      }
    }
    worst = std::max(worst, e.value());
  }
  const double t = seconds_since(t0);
  return {worst < 1e-4 && t < 30.0,
          fmt::format("worst relative error {:.3g} over 10 nets, {:.1f} s", worst, t)};
}

Outcome a3_lsd_identities() {
  Rng rng(303);
  double worst_self = 0.0, worst_ten = 0.0, worst_sym = 0.0, worst_mse = 0.0;
  for (int n = 0; n < 50; ++n) {
    const auto L = static_cast<Eigen::Index>(1 + rng.index(40));
    const auto K = static_cast<Eigen::Index>(1 + rng.index(92));
    Eigen::MatrixXd h(L, K), g(L, K);
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      h.data()[i] = std::exp(rng.uniform(-5.0, 5.0));
      g.data()[i] = std::exp(rng.uniform(-5.0, 5.0));
    }
    worst_self = std::max(worst_self, lsd_linear(h, h).overall_db);
    worst_ten = std::max(worst_ten, std::abs(lsd_linear(h, 10.0 * h).overall_db - 20.0));
    const Eigen::MatrixXd hd = to_db(h), gd = to_db(g);
    worst_sym = std::max(worst_sym, std::abs(lsd_db(hd, gd).overall_db - lsd_db(gd, hd).overall_db));
    const double l = lsd_db(hd, gd).overall_db;
    const double mse = masked_mse(gd, hd, std::vector<std::uint8_t>(static_cast<std::size_t>(L), 1));
    worst_mse = std::max(worst_mse, std::abs(l * l - mse));
  }
  const bool pass = worst_self == 0.0 && worst_ten <= 1e-9 && worst_sym <= 1e-9 && worst_mse <= 1e-9;
  return {pass, fmt::format("self {:.3g}, tenfold dev {:.3g}, symmetry {:.3g}, lsd^2-mse {:.3g}",
                            worst_self, worst_ten, worst_sym, worst_mse)};
}

Outcome a4_normalization() {
  Rng rng(404);
  double worst_energy = 0.0, worst_scale = 0.0;
  std::vector<std::vector<Direction>> grids;
  grids.push_back(synth::uniform_ring_grid(5, 24, -40, 40));
  for (int g = 0; g < 4; ++g) {
    std::vector<Direction> d;
    for (int i = 0; i < 7 + 5 * g; ++i) d.push_back({rng.uniform(0.0, 360.0), 0.0, 1.0});
    for (int i = 0; i < 20; ++i) d.push_back({rng.uniform(0.0, 360.0), rng.uniform(10.0, 80.0), 1.0});
    grids.push_back(d);
  }
  for (const auto& dirs : grids) {
    Eigen::MatrixXd lin(static_cast<Eigen::Index>(dirs.size()), 92);
    for (Eigen::Index i = 0; i < lin.size(); ++i) lin.data()[i] = std::exp(rng.uniform(-3.0, 3.0));
    const auto ring = find_equator_ring(dirs);
    const auto norm = normalize_equator(lin, ring);
    worst_energy = std::max(worst_energy, std::abs(equator_energy(norm, ring) - 1.0));
    const auto scaled = normalize_equator(lin * rng.uniform(1e-3, 1e3), ring);
    worst_scale = std::max(worst_scale, (scaled - norm).cwiseAbs().maxCoeff());
  }
  return {worst_energy <= 1e-9 && worst_scale <= 1e-12,
          fmt::format("energy deviation {:.3g}, scale deviation {:.3g} on {} rings", worst_energy,
                      worst_scale, grids.size())};
}

Outcome a5_baselines() {
  auto dirs = synth::uniform_ring_grid(7, 24, -45, 45);
  std::vector<double> f;
  for (int k = 1; k <= 92; ++k) f.push_back(172.265625 * k);
  const auto field = synth::smooth_pattern_field(dirs, f, 5);
  const auto tri = build_triangulation(dirs);
  double worst = 0.0;
  for (const auto domain : {InterpDomain::Linear, InterpDomain::Db}) {
    worst = std::max(worst, lsd(field, vbap_interpolate(field, tri, dirs, domain).values_db).overall_db);
    worst = std::max(worst, lsd(field, bilinear_interpolate(field, dirs, domain).values_db).overall_db);
  }
  const auto oct = build_triangulation(synth::octahedral_grid());
  const auto targets = synth::random_directions(1000, 55);
  double sum_dev = 0.0, min_gain = 1.0;
  std::size_t outside = 0;
  for (const auto& t : targets) {
    const auto g = vbap_gains(oct, direction_to_unit_vector(t));
    if (!g.inside) ++outside;
    sum_dev = std::max(sum_dev, std::abs(g.gains.sum() - 1.0));
    min_gain = std::min(min_gain, g.gains.minCoeff());
  }
  const bool pass = worst <= 1e-9 && outside == 0 && sum_dev <= 1e-9 && min_gain >= -1e-9;
  return {pass, fmt::format("node LSD {:.3g} dB, gain sum dev {:.3g}, min gain {:.3g}, outside {}",
                            worst, sum_dev, min_gain, outside)};
}

Outcome a6_overfit() {
  const auto t0 = Clock::now();
  const auto grid = synth::uniform_ring_grid(10, 20, -80, 80);
  const auto fg = make_frequency_grid();
  const auto field = synth::smooth_pattern_field(grid, fg.bins_hz, 1, 3);
  const std::vector<MagnitudeField> ears{extend_azimuth_wrap(field)};
  TrainConfig cfg;
  cfg.epochs = 500;
  cfg.latent_dim = 0;
  cfg.batch_size = 1;
  cfg.lr0 = 3e-3;
  const SirenShape shape{0, 128, 2, fg.size()};
  const auto res = train(siren_init(shape, 30.0, 0), ears, cfg);
  const double l = lsd(field, predict(res.network, field.directions, Eigen::VectorXd())).overall_db;
  const double t = seconds_since(t0);
  return {l < 1.0 && t < 300.0,
          fmt::format("training LSD {:.3f} dB on {} directions after 500 epochs, {:.1f} s", l,
                      grid.size(), t)};
}

// Shared by A7 and A9.
InterpolationResult a7_run(FieldDataset& ds) {
  auto specs = synth::dataset_collection(1, 3, 11);
  specs[0].grid = synth::uniform_ring_grid(5, 12, -40, 80);
  ds = make_field_dataset(synth::make_archive(specs[0]));
  ds.ears.resize(5);
  ModelConfig mc;
  mc.hidden_dim = 128;
  mc.train.epochs = 1500;
  mc.train.lr0 = 3e-4;
  mc.train.batch_size = 1;
  return run_interpolation_experiment(InterpSetting::OursR, ds, {}, parse_split("checkerboard"), mc);
}

FieldDataset g_a7_dataset;
SirenNetwork g_a7_model;

Outcome a7_overfitting_trend() {
  const auto t0 = Clock::now();
  const auto r = a7_run(g_a7_dataset);
  g_a7_model = r.model;
  const auto& rec = r.curves.reconstruction.curve("field");
  const auto& itp = r.curves.interpolation.curve("field");
  const auto& fhz = r.curves.interpolation.freq_hz;
  double gap = 0.0;
  int n = 0, violations = 0;
  for (std::size_t k = 0; k < fhz.size(); ++k) {
    if (fhz[k] <= 5000.0) continue;
    gap += itp[k] - rec[k];
    ++n;
    if (itp[k] < rec[k]) ++violations;
  }
  gap /= n;
  const double t = seconds_since(t0);
  return {violations == 0 && gap > 1.0 && t < 600.0,
          fmt::format("{} bins above 5 kHz, {} with interpolation < reconstruction, mean gap "
                      "{:.2f} dB, {:.1f} s",
                      n, violations, gap, t)};
}

Outcome a8_conditional_generation() {
  const auto t0 = Clock::now();
  const auto specs = synth::dataset_collection(9, 2, 5);
  std::vector<MagnitudeField> train_ears;
  FieldDataset target;
  for (std::size_t d = 0; d < specs.size(); ++d) {
    auto ds = make_field_dataset(synth::make_archive(specs[d]));
    if (d + 1 == specs.size()) {
      target = std::move(ds);
    } else {
      train_ears.insert(train_ears.end(), ds.ears.begin(), ds.ears.end());
    }
  }
  ModelConfig mc;
  mc.hidden_dim = 128;
  mc.train.epochs = 1500;
  mc.train.lr0 = 5e-4;
  mc.train.batch_size = 8;
  const auto res = train(init_model(mc, 92), training_fields(train_ears), mc.train);
  const NeuralFieldPredictor field(res.network, mc.train.latent_steps);
  const VbapPredictor vbap;
  const BilinearPredictor bilinear;
  const std::vector<const FieldPredictor*> methods{&field, &vbap, &bilinear};
  const auto rows = run_conditional_generation(methods, target.ears);
  std::vector<double> model_curve;
  double bilinear_5 = 0.0;
  std::string table;
  for (const auto& r : rows) {
    if (r.method == "field") model_curve.push_back(r.mean_lsd_db);
    if (r.method == "bilinear" && r.fraction == 0.05) bilinear_5 = r.mean_lsd_db;
    if (r.method != "vbap") table += fmt::format(" {}@{:.2f}={:.3f}", r.method, r.fraction, r.mean_lsd_db);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < model_curve.size(); ++i) {
    monotone = monotone && model_curve[i] <= model_curve[i - 1] + 0.1;
  }
  const bool collapse = std::isnan(bilinear_5) || bilinear_5 > model_curve.front();
  const double t = seconds_since(t0);
  return {monotone && collapse && t < 1200.0,
          fmt::format("{} training ears, held out {} ({} ears);{}; {:.1f} s", train_ears.size(),
                      target.name, target.ears.size(), table, t)};
}

Outcome a9_morph() {
  const auto& a = g_a7_dataset.ears.at(0);
  const auto& b = g_a7_dataset.ears.at(1);
  const std::vector<double> ts{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto m = latent_morph(g_a7_model, a, b, ts);
  const auto path = midsagittal_path();
  const auto ra = predict(g_a7_model, path, infer_latent(g_a7_model, a).values);
  const auto rb = predict(g_a7_model, path, infer_latent(g_a7_model, b).values);
  const bool ends = m.fields.front().values_db == ra && m.fields.back().values_db == rb;
  const bool distinct_codes = m.z_a.values != m.z_b.values;
  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    min_sep = std::min(min_sep, (m.fields[i].values_db - ra).cwiseAbs().maxCoeff());
    min_sep = std::min(min_sep, (m.fields[i].values_db - rb).cwiseAbs().maxCoeff());
  }
  return {ends && distinct_codes && min_sep > 0.0,
          fmt::format("endpoints bitwise {}, smallest intermediate separation {:.3g} dB",
                      ends ? "equal" : "different", min_sep)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome a10_determinism() {
  const auto dir = fs::temp_directory_path() / "hrtf_field_acceptance_a10";
  fs::remove_all(dir);
  fs::create_directories(dir);
  synth::DatasetSpec spec;
  spec.name = "det";
  spec.grid = synth::uniform_ring_grid(5, 12, -40, 80);
  spec.n_subjects = 2;
  save_archive(synth::make_archive(spec), dir / "det.hrdf");
  std::vector<std::string> outs;
  for (int run = 0; run < 2; ++run) {
    const auto out = dir / fmt::format("run{}.hfnf", run);
    const auto cmd = fmt::format(
        "\"{}\" train --data \"{}\" --out \"{}\" --epochs 2 --precision f64 --threads 1 "
        "--seed 11 > \"{}\" 2>&1",
        HRTF_FIELD_CLI_PATH, (dir / "det.hrdf").string(), out.string(),
        (dir / fmt::format("run{}.log", run)).string());
    if (std::system(cmd.c_str()) != 0) {
      return {false, fmt::format("train invocation {} failed", run)};
    }
    outs.push_back(slurp(out));
  }
  const bool same = !outs[0].empty() && outs[0] == outs[1];
  const auto size = outs[0].size();
  fs::remove_all(dir);
  return {same, fmt::format("two runs, {} byte models, {}", size, same ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"A1 gradient correctness", a1_gradients},
      {"A2 exact-mode gradient", a2_exact_mode},
      {"A3 LSD identities", a3_lsd_identities},
      {"A4 equator normalization", a4_normalization},
      {"A5 baseline exactness", a5_baselines},
      {"A6 single-subject overfit", a6_overfit},
      {"A7 overfitting trend", a7_overfitting_trend},
      {"A8 conditional generation", a8_conditional_generation},
      {"A9 morph endpoints", a9_morph},
      {"A10 determinism", a10_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    fmt::print("{} {} ({:.1f} s): {}\n", o.pass ? "PASS" : "FAIL", name, seconds_since(t0), o.detail);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  fmt::print("{} of {} criteria passed\n", checks.size() - static_cast<std::size_t>(failed), checks.size());
  return failed == 0 ? 0 : 1;
}
