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

#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <tuple>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hrtf_field/archive.hpp"
#include "hrtf_field/errors.hpp"
#include "hrtf_field/evaluation.hpp"
#include "hrtf_field/experiments.hpp"
#include "hrtf_field/model_io.hpp"
#include "hrtf_field/synthetic.hpp"

namespace hrtf_field::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainFlags {
  ModelConfig model;
  std::string grad_mode = "exact";
  std::string precision = "f32";
  std::string scope = "per-ear";
};

void add_train_flags(CLI::App* app, TrainFlags& f) {
  auto& t = f.model.train;
  app->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
  app->add_option("--batch-size", t.batch_size, "Subject-ears per batch")->capture_default_str();
  app->add_option("--latent-dim", t.latent_dim, "Latent code size D")->capture_default_str();
  app->add_option("--lr", t.lr0, "Initial learning rate")->capture_default_str();
  app->add_option("--lr-decay", t.lr_decay, "lr_i = lr / (1 + decay * i)")->capture_default_str();
  app->add_option("--latent-steps", t.latent_steps, "Unit gradient steps from z = 0")
      ->capture_default_str();
  app->add_option("--grad-mode", f.grad_mode, "exact or detached")->capture_default_str();
  app->add_option("--precision", f.precision, "f32 or f64")->capture_default_str();
  app->add_option("--threads", t.threads, "Worker threads for per-ear gradients")
      ->capture_default_str();
  app->add_option("--hidden", f.model.hidden_dim, "Hidden layer width")->capture_default_str();
  app->add_option("--layers", f.model.n_hidden, "Number of hidden layers")->capture_default_str();
  app->add_option("--omega0", f.model.omega0, "Sine frequency factor")->capture_default_str();
  app->add_option("--scope", f.scope, "Equator normalization: per-ear or per-database")
      ->capture_default_str();
}

void add_seed_flag(CLI::App* app, std::uint64_t& seed) {
  app->add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
}

void resolve(TrainFlags& f) {
  auto& t = f.model.train;
  if (f.grad_mode == "exact") {
    t.grad_mode = GradMode::Exact;
  } else if (f.grad_mode == "detached") {
    t.grad_mode = GradMode::Detached;
  } else {
    throw UsageError(fmt::format("unknown --grad-mode '{}' (exact, detached)", f.grad_mode));
  }
  if (f.precision == "f32") {
    t.precision = Precision::F32;
  } else if (f.precision == "f64") {
    t.precision = Precision::F64;
  } else {
    throw UsageError(fmt::format("unknown --precision '{}' (f32, f64)", f.precision));
  }
  if (f.scope != "per-ear" && f.scope != "per-database") {
    throw UsageError(fmt::format("unknown --scope '{}' (per-ear, per-database)", f.scope));
  }
  if (f.model.hidden_dim == 0 || f.model.n_hidden == 0) {
    throw UsageError("--hidden and --layers must be positive");
  }
  validate(t);
}

PreprocessOptions preprocess_options(const TrainFlags& f) {
  PreprocessOptions o;
  o.scope = f.scope == "per-database" ? NormalizationScope::PerDatabase : NormalizationScope::PerEar;
  return o;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{}", i ? "," : "", v[i]);
  return s;
}

void record(Manifest& m, const TrainFlags& f) {
  const auto& t = f.model.train;
  m.add("epochs", fmt::format("{}", t.epochs));
  m.add("batch_size", fmt::format("{}", t.batch_size));
  m.add("latent_dim", fmt::format("{}", t.latent_dim));
  m.add("lr", fmt::format("{}", t.lr0));
  m.add("lr_decay", fmt::format("{}", t.lr_decay));
  m.add("latent_steps", fmt::format("{}", t.latent_steps));
  m.add("grad_mode", to_string(t.grad_mode));
  m.add("precision", to_string(t.precision));
  m.add("threads", fmt::format("{}", t.threads));
  m.add("hidden", fmt::format("{}", f.model.hidden_dim));
  m.add("layers", fmt::format("{}", f.model.n_hidden));
  m.add("omega0", fmt::format("{}", f.model.omega0));
  m.add("scope", f.scope);
  m.add("seed", fmt::format("{}", t.seed));
}

Manifest start_manifest(std::string command) {
  Manifest m;
  m.add("tool", "hrtf-field");
  m.add("version", kVersion);
  m.add("command", std::move(command));
  return m;
}

FieldDataset load_dataset(const std::string& path, const PreprocessOptions& options) {
  return make_field_dataset(load_archive(path), options);
}

std::vector<MagnitudeField> all_ears(const std::vector<FieldDataset>& datasets) {
  std::vector<MagnitudeField> out;
  for (const auto& d : datasets) out.insert(out.end(), d.ears.begin(), d.ears.end());
  return out;
}

const MagnitudeField& find_ear(const std::vector<MagnitudeField>& ears, const std::string& key) {
  for (const auto& e : ears) {
    if (e.label == key) return e;
  }
  std::string known;
  for (std::size_t i = 0; i < ears.size() && i < 8; ++i) known += (i ? ", " : "") + ears[i].label;
  throw InvariantError(fmt::format("no subject-ear '{}' (have {}{})", key, known,
                                   ears.size() > 8 ? ", ..." : ""));
}

std::string file_stem(std::string key) {
  for (auto& c : key) {
    if (c == '/') c = '_';
    if (c == '*') c = 'm';
  }
  return key;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

// Per-epoch CSV log plus optional checkpoints.
class TrainLog {
 public:
  TrainLog(const std::string& log_path, std::string checkpoint_prefix, int checkpoint_every)
      : prefix_(std::move(checkpoint_prefix)), every_(checkpoint_every) {
    if (!log_path.empty()) {
      out_.open(log_path, std::ios::trunc);
      if (!out_) throw std::runtime_error("cannot open " + log_path + " for writing");
      out_ << "epoch,lr,mean_loss,wall_seconds\n" << std::flush;
    }
  }

  void operator()(const EpochReport& r, const SirenNetwork& net) {
    if (out_.is_open()) {
      out_ << fmt::format("{},{},{},{}\n", r.epoch, r.lr, r.mean_loss, r.wall_seconds)
           << std::flush;
    }
    fmt::print("epoch {} lr {:.6g} loss {:.6g}\n", r.epoch, r.lr, r.mean_loss);
    if (every_ > 0 && (r.epoch + 1) % every_ == 0) {
      save_model(net, fmt::format("{}.epoch{}.hfnf", prefix_, r.epoch + 1));
    }
  }

 private:
  std::ofstream out_;
  std::string prefix_;
  int every_;
};

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::vector<std::string> data;
  std::string out;
  std::string log;
  std::string manifest;
  int checkpoint_every = 0;
  TrainFlags flags;
};

int cmd_train(TrainArgs& a) {
  resolve(a.flags);
  if (a.data.empty()) throw UsageError("train needs at least one --data archive");
  std::vector<FieldDataset> datasets;
  for (const auto& p : a.data) datasets.push_back(load_dataset(p, preprocess_options(a.flags)));
  const auto ears = all_ears(datasets);

  auto m = start_manifest("train");
  m.add("data", join(a.data));
  m.add("out", a.out);
  record(m, a.flags);
  m.add("checkpoint_every", fmt::format("{}", a.checkpoint_every));
  m.write(a.manifest.empty() ? a.out + ".manifest.txt" : a.manifest);

  TrainLog log(a.log, a.out, a.checkpoint_every);
  const auto init = init_model(a.flags.model, ears.front().bins());
  const auto result = train(init, training_fields(ears), a.flags.model.train, std::ref(log));
  save_model(result.network, a.out);
  fmt::print("trained on {} subject-ears from {} archive(s); model written to {}\n", ears.size(),
             datasets.size(), a.out);
  return kOk;
}

struct ExperimentArgs {
  std::string target;
  std::vector<std::string> others;
  std::vector<std::string> data;
  std::string model;
  std::string split = "checkerboard";
  std::string out_dir;
  std::vector<double> fractions{0.05, 0.10, 0.15, 0.20, 0.25};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<double> ts{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::string ear_a;
  std::string ear_b;
  std::size_t points = 361;
  TrainFlags flags;
};

int cmd_interp(InterpSetting setting, ExperimentArgs& a) {
  resolve(a.flags);
  if (a.target.empty()) throw UsageError("--target is required");
  const auto options = preprocess_options(a.flags);
  const auto split = parse_split(a.split);
  const auto target = load_dataset(a.target, options);
  std::vector<FieldDataset> others;
  for (const auto& p : a.others) others.push_back(load_dataset(p, options));
  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);

  auto m = start_manifest("experiment " + to_string(setting));
  m.add("setting", to_string(setting));
  m.add("target", a.target);
  m.add("others", join(a.others));
  m.add("split", describe(split));
  m.add("model", a.model);
  record(m, a.flags);
  m.write(dir / "manifest.txt");

  std::optional<SirenNetwork> pretrained;
  if (!a.model.empty()) pretrained = load_model(a.model);
  TrainLog log(a.model.empty() ? (dir / "train_log.csv").string() : std::string{}, "", 0);
  const auto result = run_interpolation_experiment(setting, target, others, split, a.flags.model,
                                                   pretrained ? &*pretrained : nullptr,
                                                   std::ref(log));
  if (!pretrained) save_model(result.model, dir / "model.hfnf");
  write_curves_csv(dir / "reconstruction.csv", result.curves.reconstruction);
  write_curves_csv(dir / "interpolation.csv", result.curves.interpolation);
  const auto& ic = result.curves.interpolation;
  for (std::size_t i = 0; i < ic.methods.size(); ++i) {
    double mean = 0.0;
    for (double v : ic.lsd_db[i]) mean += v;
    fmt::print("{:<9} mean interpolation LSD {:.3f} dB\n", ic.methods[i],
               mean / static_cast<double>(ic.lsd_db[i].size()));
  }
  return kOk;
}

int cmd_cond_gen(ExperimentArgs& a) {
  resolve(a.flags);
  if (a.model.empty() || a.target.empty()) throw UsageError("cond-gen needs --model and --target");
  const auto net = load_model(a.model);
  const auto target = load_dataset(a.target, preprocess_options(a.flags));
  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);

  auto m = start_manifest("experiment cond-gen");
  m.add("model", a.model);
  m.add("target", a.target);
  m.add("fractions", join(a.fractions));
  m.add("seeds", join(a.seeds));
  m.add("latent_steps", fmt::format("{}", a.flags.model.train.latent_steps));
  m.add("scope", a.flags.scope);
  m.write(dir / "manifest.txt");

  const NeuralFieldPredictor field(net, a.flags.model.train.latent_steps);
  const VbapPredictor vbap;
  const BilinearPredictor bilinear;
  const std::vector<const FieldPredictor*> predictors{&field, &vbap, &bilinear};
  CondGenConfig cfg;
  cfg.fractions = a.fractions;
  cfg.seeds = a.seeds;
  const auto rows = run_conditional_generation(predictors, target.ears, cfg);
  write_condgen_csv(dir / "cond_gen.csv", rows);
  for (const auto& r : rows) {
    fmt::print("{:.2f} {:<9} mean {:.3f} dB std {:.3f} dB ({} failed of {})\n", r.fraction,
               r.method, r.mean_lsd_db, r.std_lsd_db, r.failures, r.trials);
  }
  return kOk;
}

int cmd_latent_morph(ExperimentArgs& a) {
  resolve(a.flags);
  if (a.model.empty() || a.data.empty()) throw UsageError("latent-morph needs --model and --data");
  const auto net = load_model(a.model);
  std::vector<FieldDataset> datasets;
  for (const auto& p : a.data) datasets.push_back(load_dataset(p, preprocess_options(a.flags)));
  const auto ears = all_ears(datasets);
  if (ears.size() < 2 && (a.ear_a.empty() || a.ear_b.empty())) {
    throw InvariantError("latent-morph needs two subject-ears");
  }
  const auto& ea = a.ear_a.empty() ? ears[0] : find_ear(ears, a.ear_a);
  const auto& eb = a.ear_b.empty() ? ears[1] : find_ear(ears, a.ear_b);
  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);

  auto m = start_manifest("experiment latent-morph");
  m.add("model", a.model);
  m.add("data", join(a.data));
  m.add("ear_a", ea.label);
  m.add("ear_b", eb.label);
  m.add("t", join(a.ts));
  m.add("points", fmt::format("{}", a.points));
  m.add("latent_steps", fmt::format("{}", a.flags.model.train.latent_steps));
  m.add("scope", a.flags.scope);
  m.write(dir / "manifest.txt");

  const auto path = midsagittal_path(a.points);
  const auto morph = latent_morph(net, ea, eb, a.ts, path, a.flags.model.train.latent_steps);
  for (std::size_t i = 0; i < a.ts.size(); ++i) {
    MidsagittalTable t;
    t.polar_angle_deg = midsagittal_polar_angles(a.points);
    t.freq_hz = morph.fields[i].freq_grid_hz;
    t.magnitude_db = morph.fields[i].values_db;
    const auto name = fmt::format("morph_t{:.3f}.csv", a.ts[i]);
    write_midsagittal_csv(dir / name, t);
    fmt::print("t={} -> {}\n", a.ts[i], (dir / name).string());
  }
  return kOk;
}

struct BaselineArgs {
  std::string data;
  std::string method;
  std::string split = "checkerboard";
  bool db_domain = false;
  std::string ear;
  std::string out_dir;
  std::string scope = "per-ear";
};

int cmd_baseline(BaselineArgs& a) {
  const auto domain = a.db_domain ? InterpDomain::Db : InterpDomain::Linear;
  std::unique_ptr<FieldPredictor> method;
  if (a.method == "vbap") {
    method = std::make_unique<VbapPredictor>(domain);
  } else if (a.method == "bilinear") {
    method = std::make_unique<BilinearPredictor>(domain);
  } else {
    throw UsageError(fmt::format("unknown --method '{}' (vbap, bilinear)", a.method));
  }
  TrainFlags scope_only;
  scope_only.scope = a.scope;
  resolve(scope_only);
  const auto split = parse_split(a.split);
  const auto ds = load_dataset(a.data, preprocess_options(scope_only));
  std::vector<MagnitudeField> ears;
  if (a.ear.empty()) {
    ears = ds.ears;
  } else {
    ears.push_back(find_ear(ds.ears, a.ear));
  }
  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);

  auto m = start_manifest("baseline");
  m.add("data", a.data);
  m.add("method", a.method);
  m.add("domain", a.db_domain ? "db" : "linear");
  m.add("split", describe(split));
  m.add("ear", a.ear);
  m.add("scope", a.scope);
  m.write(dir / "manifest.txt");

  std::ofstream report(dir / "lsd.csv", std::ios::trunc);
  if (!report) throw std::runtime_error("cannot write " + (dir / "lsd.csv").string());
  report << "ear,role,n_locations,overall_lsd_db\n";
  for (const auto& ear : ears) {
    method->check_grid(ear.directions);
    const auto resolved = make_split(ear.directions, split);
    const auto observed = ear.select_rows(resolved.observed());
    auto rows = resolved.desired();
    const bool held_out = !rows.empty();
    if (!held_out) rows = resolved.observed();
    auto truth = ear.select_rows(rows);
    MagnitudeField pred = truth;
    pred.values_db = method->predict(observed, truth.directions);
    const auto r = lsd(truth, pred.values_db);
    write_field_csv(dir / (file_stem(ear.label) + "_pred.csv"), pred);
    report << fmt::format("{},{},{},{}\n", ear.label, held_out ? "desired" : "observed",
                          r.n_locations, r.overall_db);
    fmt::print("{:<24} {} LSD {:.4f} dB over {} {} directions\n", ear.label, a.method,
               r.overall_db, r.n_locations, held_out ? "desired" : "observed");
  }
  if (!report.flush()) throw std::runtime_error("write failed: lsd.csv");
  return kOk;
}

struct SynthArgs {
  std::string out_dir;
  int datasets = 3;
  int subjects = 4;
  std::uint64_t seed = 0;
  std::string grid = "rings";
};

int cmd_synth(SynthArgs& a) {
  if (a.datasets < 1 || a.subjects < 1) throw UsageError("--datasets and --subjects must be >= 1");
  std::vector<synth::DatasetSpec> specs;
  if (a.grid == "rings") {
    specs = synth::dataset_collection(a.datasets, a.subjects, a.seed);
  } else if (a.grid == "interaural") {
    synth::DatasetSpec s;
    s.name = "interaural";
    s.grid = synth::interaural_grid();
    s.n_subjects = a.subjects;
    s.seed = a.seed;
    specs.push_back(s);
  } else {
    throw UsageError(fmt::format("unknown --grid '{}' (rings, interaural)", a.grid));
  }
  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);
  auto m = start_manifest("synth");
  m.add("datasets", fmt::format("{}", a.datasets));
  m.add("subjects", fmt::format("{}", a.subjects));
  m.add("grid", a.grid);
  m.add("seed", fmt::format("{}", a.seed));
  m.write(dir / "manifest.txt");
  for (const auto& s : specs) {
    const auto path = dir / (s.name + ".hrdf");
    save_archive(synth::make_archive(s), path);
    fmt::print("{}: {} directions, {} Hz -> {}\n", s.name, s.grid.size(), s.sample_rate_hz,
               path.string());
  }
  return kOk;
}

int cmd_info(const std::string& path) {
  const auto a = load_archive(path);
  fmt::print("dataset {}\nsample rate {} Hz\nsubject-ears {}\n", a.dataset_name, a.sample_rate_hz,
             a.subject_ears.size());
  for (const auto& e : a.subject_ears) {
    double lo = 90.0;
    double hi = -90.0;
    for (const auto& d : e.directions) {
      lo = std::min(lo, d.elevation_deg);
      hi = std::max(hi, d.elevation_deg);
    }
    fmt::print("  {:<24} {} locations, {} taps, elevation [{}, {}]\n", e.key(),
               e.location_count(), e.hrirs.cols(), lo, hi);
  }
  return kOk;
}

struct MidsagittalArgs {
  std::string data;
  std::string ear;
  std::string model;
  std::size_t points = 361;
  int latent_steps = 1;
  std::string out;
};

int cmd_midsagittal(MidsagittalArgs& a) {
  const auto ds = load_dataset(a.data, {});
  const auto& ear = a.ear.empty() ? ds.ears.front() : find_ear(ds.ears, a.ear);
  MidsagittalTable t;
  if (a.model.empty()) {
    t = export_midsagittal(ear, a.points);
  } else {
    const auto net = load_model(a.model);
    t = export_midsagittal(net, infer_latent(net, ear, a.latent_steps), ear.freq_grid_hz,
                           a.points);
  }
  write_midsagittal_csv(a.out, t);
  auto m = start_manifest("midsagittal");
  m.add("data", a.data);
  m.add("ear", ear.label);
  m.add("model", a.model);
  m.add("points", fmt::format("{}", a.points));
  m.add("latent_steps", fmt::format("{}", a.latent_steps));
  m.write(a.out + ".manifest.txt");
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Neural-field HRTF toolkit: training, interpolation baselines and experiments",
               "hrtf-field"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a field model on HRDF archives");
  train_cmd->add_option("--data", train_args.data, "HRDF archive (repeatable)")->required();
  train_cmd->add_option("--out", train_args.out, "Model file to write")->required();
  train_cmd->add_option("--log", train_args.log, "Per-epoch CSV log");
  train_cmd->add_option("--manifest", train_args.manifest, "Manifest path (default <out>.manifest.txt)");
  train_cmd->add_option("--checkpoint-every", train_args.checkpoint_every,
                        "Write <out>.epoch<N>.hfnf every N epochs");
  add_train_flags(train_cmd, train_args.flags);
  add_seed_flag(train_cmd, train_args.flags.model.train.seed);

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Run an evaluation protocol");
  exp_cmd->require_subcommand(1);
  std::vector<std::pair<CLI::App*, InterpSetting>> interp_cmds;
  for (auto [name, setting, help] :
       {std::tuple{"interp-r", InterpSetting::OursR, "Train on the target's observed rows"},
        std::tuple{"interp-t", InterpSetting::OursT, "Observed target rows plus other datasets"},
        std::tuple{"interp-e", InterpSetting::OursE, "Other datasets only; target held out"}}) {
    auto* c = exp_cmd->add_subcommand(name, help);
    c->add_option("--target", exp.target, "Target dataset archive")->required();
    c->add_option("--others", exp.others, "Other dataset archives");
    c->add_option("--split", exp.split, "checkerboard | random:<p>[:<seed>] | decimate:<n> | all")
        ->capture_default_str();
    c->add_option("--model", exp.model, "Evaluate this model instead of training one");
    c->add_option("--out-dir", exp.out_dir, "Output directory")->required();
    add_train_flags(c, exp.flags);
    add_seed_flag(c, exp.flags.model.train.seed);
    interp_cmds.emplace_back(c, setting);
  }
  auto* cond_cmd = exp_cmd->add_subcommand("cond-gen", "Generation from sparse random observations");
  cond_cmd->add_option("--model", exp.model, "Model trained without the target")->required();
  cond_cmd->add_option("--target", exp.target, "Held-out dataset archive")->required();
  cond_cmd->add_option("--fractions", exp.fractions, "Observed fractions")
      ->delimiter(',')
      ->capture_default_str();
  cond_cmd->add_option("--seeds", exp.seeds, "Split seeds")->delimiter(',')->capture_default_str();
  cond_cmd->add_option("--latent-steps", exp.flags.model.train.latent_steps)->capture_default_str();
  cond_cmd->add_option("--scope", exp.flags.scope)->capture_default_str();
  cond_cmd->add_option("--out-dir", exp.out_dir, "Output directory")->required();
  auto* morph_cmd = exp_cmd->add_subcommand("latent-morph", "Interpolate between two latent codes");
  morph_cmd->add_option("--model", exp.model, "Model file")->required();
  morph_cmd->add_option("--data", exp.data, "Archives holding the two ears")->required();
  morph_cmd->add_option("--ear-a", exp.ear_a, "Key of the first ear (default: first ear)");
  morph_cmd->add_option("--ear-b", exp.ear_b, "Key of the second ear (default: second ear)");
  morph_cmd->add_option("--t", exp.ts, "Blend weights")->delimiter(',')->capture_default_str();
  morph_cmd->add_option("--points", exp.points, "Points on the midsagittal path")
      ->capture_default_str();
  morph_cmd->add_option("--latent-steps", exp.flags.model.train.latent_steps)->capture_default_str();
  morph_cmd->add_option("--scope", exp.flags.scope)->capture_default_str();
  morph_cmd->add_option("--out-dir", exp.out_dir, "Output directory")->required();

  BaselineArgs base;
  auto* base_cmd = app.add_subcommand("baseline", "Run VBAP or bilinear interpolation standalone");
  base_cmd->add_option("--data", base.data, "HRDF archive")->required();
  base_cmd->add_option("--method", base.method, "vbap or bilinear")->required();
  base_cmd->add_option("--split", base.split, "Observed/desired split")->capture_default_str();
  base_cmd->add_flag("--db-domain", base.db_domain, "Combine in dB instead of linear magnitude");
  base_cmd->add_option("--ear", base.ear, "Only this subject-ear key");
  base_cmd->add_option("--scope", base.scope)->capture_default_str();
  base_cmd->add_option("--out-dir", base.out_dir, "Output directory")->required();

  SynthArgs syn;
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic HRDF archives");
  synth_cmd->add_option("--out-dir", syn.out_dir, "Output directory")->required();
  synth_cmd->add_option("--datasets", syn.datasets)->capture_default_str();
  synth_cmd->add_option("--subjects", syn.subjects)->capture_default_str();
  synth_cmd->add_option("--grid", syn.grid, "rings or interaural")->capture_default_str();
  add_seed_flag(synth_cmd, syn.seed);

  std::string info_path;
  auto* info_cmd = app.add_subcommand("info", "Summarize an HRDF archive");
  info_cmd->add_option("archive", info_path)->required();

  MidsagittalArgs mid;
  auto* mid_cmd = app.add_subcommand("midsagittal", "Export one ear on the midsagittal plane");
  mid_cmd->add_option("--data", mid.data, "HRDF archive")->required();
  mid_cmd->add_option("--ear", mid.ear, "Subject-ear key (default: first)");
  mid_cmd->add_option("--model", mid.model, "Render the model instead of the measurements");
  mid_cmd->add_option("--points", mid.points)->capture_default_str();
  mid_cmd->add_option("--latent-steps", mid.latent_steps)->capture_default_str();
  mid_cmd->add_option("--out", mid.out, "CSV path")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_args);
    for (auto& [c, setting] : interp_cmds) {
      if (*c) return cmd_interp(setting, exp);
    }
    if (*cond_cmd) return cmd_cond_gen(exp);
    if (*morph_cmd) return cmd_latent_morph(exp);
    if (*base_cmd) return cmd_baseline(base);
    if (*synth_cmd) return cmd_synth(syn);
    if (*info_cmd) return cmd_info(info_path);
    if (*mid_cmd) return cmd_midsagittal(mid);
  } catch (const UsageError& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return kUsage;
  } catch (const UnsupportedModeError& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return kUsage;
  } catch (const NumericError& e) {
    fmt::print(stderr, "numeric error: {}\n", e.what());
    return kNumericError;
  } catch (const FormatError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kDataError;
  } catch (const InvariantError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kDataError;
  }
  return kUsage;
}

}  // namespace hrtf_field::cli
