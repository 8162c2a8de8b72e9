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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hrtf_field/hrtf_data.hpp"
#include "hrtf_field/siren.hpp"

namespace hrtf_field {

// Point on the learned subject manifold.
struct LatentCode {
  Eigen::VectorXd values;

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

// Exact differentiates the weight update through the latent gradient step;
// Detached treats the inferred latent as a constant.
enum class GradMode { Exact, Detached };
enum class Precision { F32, F64 };

struct TrainConfig {
  int epochs = 300;
  int batch_size = 18;
  int latent_dim = 32;
  double lr0 = 0.0003;
  double lr_decay = 0.01;
  GradMode grad_mode = GradMode::Exact;
  int latent_steps = 1;
  std::uint64_t seed = 0;
  Precision precision = Precision::F32;
  int threads = 1;
};

void validate(const TrainConfig& cfg);
std::string to_string(GradMode mode);
std::string to_string(Precision p);

// lr0 / (1 + lr_decay * epoch)
double lr_schedule(int epoch, const TrainConfig& cfg);

// Mean squared difference over the rows with mask != 0 and all columns.
double masked_mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                  std::span<const std::uint8_t> mask);

// Up to batch_size ears padded to a common row count.
template <typename T>
struct TrainingBatch {
  std::vector<EarObservations<T>> ears;
  std::size_t padded_rows = 0;
};

template <typename T>
TrainingBatch<T> make_batch(std::span<const MagnitudeField* const> fields);

// Starts at the origin and takes `steps` unit steps down the masked MSE
// gradient with respect to z.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> infer_latent(const BasicSirenNetwork<T>& net,
                                                 const EarObservations<T>& obs, int steps = 1);

LatentCode infer_latent(const SirenNetwork& net, const MagnitudeField& observations,
                        int steps = 1);

template <typename T>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<ad::Matrix<T>> m;
  std::vector<ad::Matrix<T>> v;
};

// One bias-corrected Adam update. Moments are lazily shaped on first use.
template <typename T>
void adam_step(std::span<ad::Matrix<T>* const> params, std::span<const ad::Matrix<T>> grads,
               AdamState<T>& state, double lr);

// Gradient and loss of one batch, averaged over its ears.
template <typename T>
ParamGradients<T> batch_gradients(const BasicSirenNetwork<T>& net, const TrainingBatch<T>& batch,
                                  const TrainConfig& cfg);

struct EpochResult {
  double mean_loss = 0.0;
  int batches = 0;
};

// One pass over the ears in seeded shuffled order, one Adam step per batch.
template <typename T>
EpochResult train_epoch(BasicSirenNetwork<T>& net, AdamState<T>& adam,
                        std::span<const MagnitudeField> ears, const TrainConfig& cfg, int epoch);

struct EpochReport {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  SirenNetwork network;
  std::vector<EpochReport> history;
};

// Optional per-epoch hook, called after each epoch with the current weights.
using EpochCallback = std::function<void(const EpochReport&, const SirenNetwork&)>;

// Runs cfg.epochs epochs at cfg.precision starting from `init`.
TrainResult train(const SirenNetwork& init, std::span<const MagnitudeField> ears,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace hrtf_field
