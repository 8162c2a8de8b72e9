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

#include "hrtf_field/igon.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "hrtf_field/errors.hpp"
#include "hrtf_field/random.hpp"

namespace hrtf_field {

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 0 || cfg.batch_size < 1 || cfg.latent_dim < 0 || !(cfg.lr0 > 0.0) ||
      cfg.lr_decay < 0.0 || cfg.latent_steps < 0 || cfg.threads < 1) {
    throw InvariantError("invalid training configuration");
  }
}

std::string to_string(GradMode mode) { return mode == GradMode::Exact ? "exact" : "detached"; }
std::string to_string(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

double lr_schedule(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw InvariantError("lr_schedule: negative epoch");
  return cfg.lr0 / (1.0 + cfg.lr_decay * epoch);
}

double masked_mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                  std::span<const std::uint8_t> mask) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols() ||
      static_cast<std::size_t>(pred.rows()) != mask.size()) {
    throw InvariantError("masked_mse: shape mismatch");
  }
  double acc = 0.0;
  std::size_t rows = 0;
  for (Eigen::Index r = 0; r < pred.rows(); ++r) {
    if (!mask[static_cast<std::size_t>(r)]) continue;
    acc += (pred.row(r) - target.row(r)).squaredNorm();
    ++rows;
  }
  if (rows == 0 || pred.cols() == 0) throw InvariantError("masked_mse: no unmasked cells");
  return acc / static_cast<double>(rows * static_cast<std::size_t>(pred.cols()));
}

template <typename T>
TrainingBatch<T> make_batch(std::span<const MagnitudeField* const> fields) {
  TrainingBatch<T> b;
  for (const auto* f : fields) b.padded_rows = std::max(b.padded_rows, f->rows());
  for (const auto* f : fields) b.ears.push_back(make_observations<T>(*f, b.padded_rows));
  return b;
}

template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> infer_latent(const BasicSirenNetwork<T>& net,
                                                 const EarObservations<T>& obs, int steps) {
  if (steps < 0) throw InvariantError("infer_latent: negative step count");
  Eigen::Matrix<T, Eigen::Dynamic, 1> z =
      Eigen::Matrix<T, Eigen::Dynamic, 1>::Zero(static_cast<Eigen::Index>(net.latent_dim));
  if (net.latent_dim == 0) return z;
  for (int s = 0; s < steps; ++s) {
    const auto g = grad_latent(net, obs, z);
    if (!g.gradient.allFinite()) throw NumericError("infer_latent: non-finite gradient");
    z -= g.gradient;
  }
  return z;
}

LatentCode infer_latent(const SirenNetwork& net, const MagnitudeField& observations, int steps) {
  return {infer_latent(net, make_observations<double>(observations), steps)};
}

template <typename T>
void adam_step(std::span<ad::Matrix<T>* const> params, std::span<const ad::Matrix<T>> grads,
               AdamState<T>& state, double lr) {
  if (params.size() != grads.size()) throw InvariantError("adam_step: tensor count mismatch");
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.push_back(ad::Matrix<T>::Zero(p->rows(), p->cols()));
      state.v.push_back(ad::Matrix<T>::Zero(p->rows(), p->cols()));
    }
  }
  if (state.m.size() != params.size()) throw InvariantError("adam_step: state size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i]->rows() || grads[i].cols() != params[i]->cols() ||
        state.m[i].rows() != params[i]->rows() || state.m[i].cols() != params[i]->cols()) {
      throw InvariantError(fmt::format("adam_step: shape mismatch on tensor {}", i));
    }
  }
  ++state.step;
  const T b1 = static_cast<T>(state.beta1);
  const T b2 = static_cast<T>(state.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(state.beta1, static_cast<double>(state.step)));
  const T c2 = static_cast<T>(1.0 - std::pow(state.beta2, static_cast<double>(state.step)));
  const T eps = static_cast<T>(state.epsilon);
  const T rate = static_cast<T>(lr);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.m[i];
    auto& v = state.v[i];
    const auto& g = grads[i];
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g.cwiseProduct(g);
    auto& p = *params[i];
    p.array() -= rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
}

namespace {

template <typename T>
ParamGradients<T> ear_gradients(const BasicSirenNetwork<T>& net, const EarObservations<T>& obs,
                                const TrainConfig& cfg) {
  if (cfg.grad_mode == GradMode::Exact) {
    return grad_params_through_latent_step(net, obs, cfg.latent_steps).params;
  }
  const auto z = infer_latent(net, obs, cfg.latent_steps);
  return grad_params(net, obs, z);
}

}  // namespace

template <typename T>
ParamGradients<T> batch_gradients(const BasicSirenNetwork<T>& net, const TrainingBatch<T>& batch,
                                  const TrainConfig& cfg) {
  const std::size_t n = batch.ears.size();
  if (n == 0) throw InvariantError("batch_gradients: empty batch");
  std::vector<ParamGradients<T>> per_ear(n);
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) per_ear[i] = ear_gradients(net, batch.ears[i], cfg);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) {
            per_ear[i] = ear_gradients(net, batch.ears[i], cfg);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  // Fixed reduction order keeps the result independent of the thread count.
  ParamGradients<T> out = std::move(per_ear[0]);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t t = 0; t < out.tensors.size(); ++t) out.tensors[t] += per_ear[i].tensors[t];
    out.loss += per_ear[i].loss;
  }
  const T inv = T(1) / static_cast<T>(n);
  for (auto& t : out.tensors) t *= inv;
  out.loss *= inv;
  if (!std::isfinite(static_cast<double>(out.loss))) {
    throw NumericError("batch loss is not finite");
  }
  return out;
}

template <typename T>
EpochResult train_epoch(BasicSirenNetwork<T>& net, AdamState<T>& adam,
                        std::span<const MagnitudeField> ears, const TrainConfig& cfg, int epoch) {
  validate(cfg);
  if (ears.empty()) throw InvariantError("train_epoch: no subject-ears");
  std::vector<std::size_t> order(ears.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(epoch + 1)));
  rng.shuffle(std::span(order));

  const double lr = lr_schedule(epoch, cfg);
  EpochResult result;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(cfg.batch_size)) {
    const auto stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
    std::vector<const MagnitudeField*> members;
    for (std::size_t i = start; i < stop; ++i) members.push_back(&ears[order[i]]);
    const auto batch = make_batch<T>(members);
    const auto grads = batch_gradients(net, batch, cfg);
    auto refs = net.parameter_refs();
    adam_step<T>(refs, grads.tensors, adam, lr);
    loss_sum += static_cast<double>(grads.loss);
    ++result.batches;
  }
  result.mean_loss = loss_sum / result.batches;
  return result;
}

namespace {

template <typename T>
TrainResult train_as(const SirenNetwork& init, std::span<const MagnitudeField> ears,
                     const TrainConfig& cfg, const EpochCallback& on_epoch) {
  BasicSirenNetwork<T> net = init.cast<T>();
  AdamState<T> adam;
  TrainResult result;
  for (int e = 0; e < cfg.epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = train_epoch(net, adam, ears, cfg, e);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    EpochReport report{e, lr_schedule(e, cfg), r.mean_loss, dt.count()};
    result.history.push_back(report);
    if (on_epoch) on_epoch(report, net.template cast<double>());
  }
  result.network = net.template cast<double>();
  return result;
}

}  // namespace

TrainResult train(const SirenNetwork& init, std::span<const MagnitudeField> ears,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  validate(cfg);
  validate(init);
  if (init.latent_dim != static_cast<std::size_t>(cfg.latent_dim)) {
    throw InvariantError(fmt::format("network latent size {} != configured {}", init.latent_dim,
                                     cfg.latent_dim));
  }
  for (const auto& f : ears) {
    validate(f);
    if (f.bins() != init.output_dim()) {
      throw InvariantError(f.label + ": bin count does not match the network output");
    }
  }
  return cfg.precision == Precision::F32 ? train_as<float>(init, ears, cfg, on_epoch)
                                         : train_as<double>(init, ears, cfg, on_epoch);
}

#define HRTF_FIELD_INSTANTIATE(T)                                                               \
  template TrainingBatch<T> make_batch(std::span<const MagnitudeField* const>);                 \
  template Eigen::Matrix<T, Eigen::Dynamic, 1> infer_latent(const BasicSirenNetwork<T>&,        \
                                                            const EarObservations<T>&, int);    \
  template void adam_step(std::span<ad::Matrix<T>* const>, std::span<const ad::Matrix<T>>,      \
                          AdamState<T>&, double);                                               \
  template ParamGradients<T> batch_gradients(const BasicSirenNetwork<T>&,                       \
                                             const TrainingBatch<T>&, const TrainConfig&);      \
  template EpochResult train_epoch(BasicSirenNetwork<T>&, AdamState<T>&,                        \
                                   std::span<const MagnitudeField>, const TrainConfig&, int);

HRTF_FIELD_INSTANTIATE(float)
HRTF_FIELD_INSTANTIATE(double)

#undef HRTF_FIELD_INSTANTIATE

}  // namespace hrtf_field
