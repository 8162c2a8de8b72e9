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

#include <benchmark/benchmark.h>

#include "hrtf_field/geometry.hpp"
#include "hrtf_field/igon.hpp"
#include "hrtf_field/preprocess.hpp"
#include "hrtf_field/synthetic.hpp"

namespace hrtf_field {
namespace {

MagnitudeField bench_field(std::size_t rows) {
  const auto fg = make_frequency_grid();
  return synth::smooth_pattern_field(synth::random_directions(rows, 1), fg.bins_hz, 1);
}

SirenNetwork bench_net(std::size_t hidden) {
  SirenShape s;
  s.hidden_dim = hidden;
  return siren_init(s, 30.0, 0);
}

void BM_Predict(benchmark::State& state) {
  const auto net = bench_net(static_cast<std::size_t>(state.range(0)));
  const auto dirs = synth::random_directions(200, 2);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(32);
  for (auto _ : state) benchmark::DoNotOptimize(predict(net, dirs, z));
}
BENCHMARK(BM_Predict)->Arg(128)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

template <typename T>
void ear_gradient(benchmark::State& state, GradMode mode) {
  const auto net = bench_net(static_cast<std::size_t>(state.range(0))).cast<T>();
  const auto field = bench_field(200);
  const std::vector<const MagnitudeField*> members{&field};
  const auto batch = make_batch<T>(members);
  TrainConfig cfg;
  cfg.grad_mode = mode;
  for (auto _ : state) benchmark::DoNotOptimize(batch_gradients(net, batch, cfg));
}

void BM_GradExactF32(benchmark::State& s) { ear_gradient<float>(s, GradMode::Exact); }
void BM_GradDetachedF32(benchmark::State& s) { ear_gradient<float>(s, GradMode::Detached); }
void BM_GradExactF64(benchmark::State& s) { ear_gradient<double>(s, GradMode::Exact); }
BENCHMARK(BM_GradExactF32)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradDetachedF32)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradExactF64)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Triangulation(benchmark::State& state) {
  const auto dirs = synth::random_directions(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(build_triangulation(dirs));
}
BENCHMARK(BM_Triangulation)->Arg(200)->Arg(1250)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Magnitude(benchmark::State& state) {
  synth::DatasetSpec spec;
  spec.grid = synth::interaural_grid();
  spec.n_subjects = 1;
  spec.taps = static_cast<int>(state.range(0));
  spec.both_ears = false;
  const auto archive = synth::make_archive(spec);
  const auto fg = make_frequency_grid();
  for (auto _ : state) benchmark::DoNotOptimize(hrir_to_magnitude(archive.subject_ears[0], fg));
}
BENCHMARK(BM_Magnitude)->Arg(200)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace hrtf_field

BENCHMARK_MAIN();
