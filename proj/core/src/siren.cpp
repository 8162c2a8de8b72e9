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

#include "hrtf_field/siren.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hrtf_field/errors.hpp"
#include "hrtf_field/random.hpp"

namespace hrtf_field {

template <typename T>
std::size_t BasicSirenNetwork<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

template <typename T>
std::vector<ad::Matrix<T>*> BasicSirenNetwork<T>::parameter_refs() {
  std::vector<ad::Matrix<T>*> out;
  for (auto& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

template <typename T>
std::vector<const ad::Matrix<T>*> BasicSirenNetwork<T>::parameter_refs() const {
  std::vector<const ad::Matrix<T>*> out;
  for (const auto& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

template <typename T>
void validate(const BasicSirenNetwork<T>& net) {
  if (net.layers.empty()) throw InvariantError("siren: no layers");
  if (!(net.omega0 > 0.0) || !std::isfinite(net.omega0)) {
    throw InvariantError("siren: omega0 must be positive");
  }
  if (net.input_dim() != 2 + net.latent_dim) {
    throw InvariantError(fmt::format("siren: input width {} != 2 + latent_dim {}",
                                     net.input_dim(), net.latent_dim));
  }
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    if (l.weight.rows() == 0 || l.weight.cols() == 0) {
      throw InvariantError(fmt::format("siren: layer {} has a zero dimension", i));
    }
    if (l.bias.rows() != 1 || l.bias.cols() != l.weight.rows()) {
      throw InvariantError(fmt::format("siren: layer {} bias shape mismatch", i));
    }
    if (i + 1 < net.layers.size() && net.layers[i + 1].weight.cols() != l.weight.rows()) {
      throw InvariantError(fmt::format("siren: layer {} outputs {} but layer {} expects {}", i,
                                       l.weight.rows(), i + 1,
                                       net.layers[i + 1].weight.cols()));
    }
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      throw InvariantError(fmt::format("siren: layer {} has non-finite parameters", i));
    }
  }
}

std::vector<std::size_t> SirenShape::layer_sizes() const {
  std::vector<std::size_t> s{2 + latent_dim};
  for (std::size_t i = 0; i < n_hidden; ++i) s.push_back(hidden_dim);
  s.push_back(output_dim);
  return s;
}

double siren_weight_bound(std::size_t layer_index, std::size_t fan_in, double omega0) {
  const double n = static_cast<double>(fan_in);
  return layer_index == 0 ? 1.0 / n : std::sqrt(6.0 / n) / omega0;
}

SirenNetwork siren_init(std::span<const std::size_t> sizes, double omega0, std::uint64_t seed) {
  if (sizes.size() < 2) throw InvariantError("siren_init: need at least input and output sizes");
  for (auto s : sizes) {
    if (s == 0) throw InvariantError("siren_init: zero-sized layer");
  }
  if (sizes.front() < 2) throw InvariantError("siren_init: input must include 2 coordinates");
  SirenNetwork net;
  net.omega0 = omega0;
  net.latent_dim = sizes.front() - 2;
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const auto in = static_cast<Eigen::Index>(sizes[i]);
    const auto out = static_cast<Eigen::Index>(sizes[i + 1]);
    const double wb = siren_weight_bound(i, sizes[i], omega0);
    const double bb = 1.0 / std::sqrt(static_cast<double>(sizes[i]));
    SirenNetwork::Layer layer{ad::Matrix<double>(out, in), ad::Matrix<double>(1, out)};
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = rng.uniform(-wb, wb);
    }
    for (Eigen::Index c = 0; c < out; ++c) layer.bias(0, c) = rng.uniform(-bb, bb);
    net.layers.push_back(std::move(layer));
  }
  validate(net);
  return net;
}

SirenNetwork siren_init(const SirenShape& shape, double omega0, std::uint64_t seed) {
  const auto sizes = shape.layer_sizes();
  return siren_init(sizes, omega0, seed);
}

Eigen::Vector2d normalize_coordinates(const Direction& d) {
  return {(d.azimuth_deg - 180.0) / 180.0, d.elevation_deg / 90.0};
}

Eigen::MatrixXd coordinate_matrix(std::span<const Direction> directions) {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(directions.size()), 2);
  for (std::size_t i = 0; i < directions.size(); ++i) {
    c.row(static_cast<Eigen::Index>(i)) = normalize_coordinates(directions[i]).transpose();
  }
  return c;
}

template <typename T>
std::vector<ad::Var<T>> BoundSiren<T>::leaves() const {
  std::vector<ad::Var<T>> out{first_coord_weight};
  if (first_latent_weight.valid()) out.push_back(first_latent_weight);
  for (std::size_t i = 0; i < biases.size(); ++i) {
    if (i > 0) out.push_back(weights[i]);
    out.push_back(biases[i]);
  }
  return out;
}

template <typename T>
BoundSiren<T> bind(ad::Tape<T>& tape, const BasicSirenNetwork<T>& net, bool requires_grad) {
  BoundSiren<T> b;
  b.omega0 = net.omega0;
  const auto& w0 = net.layers.front().weight;
  b.first_coord_weight = tape.leaf(w0.leftCols(2), requires_grad);
  if (net.latent_dim > 0) {
    b.first_latent_weight =
        tape.leaf(w0.rightCols(static_cast<Eigen::Index>(net.latent_dim)), requires_grad);
  }
  b.weights.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (i > 0) b.weights[i] = tape.leaf(net.layers[i].weight, requires_grad);
    b.biases.push_back(tape.leaf(net.layers[i].bias, requires_grad));
  }
  return b;
}

template <typename T>
ad::Var<T> forward(ad::Tape<T>& tape, const BoundSiren<T>& net, ad::Var<T> coords,
                   ad::Var<T> z) {
  const T w0 = static_cast<T>(net.omega0);
  const std::size_t n_layers = net.biases.size();
  // The latent enters as a per-ear offset of the first pre-activation.
  ad::Var<T> first_bias = net.biases[0];
  if (net.first_latent_weight.valid()) {
    first_bias = tape.add(tape.matmul_bt(z, net.first_latent_weight), first_bias);
  }
  ad::Var<T> h = tape.add_rowvec(tape.matmul_bt(coords, net.first_coord_weight), first_bias);
  if (n_layers == 1) return h;
  h = tape.sin(tape.scale(h, w0));
  for (std::size_t i = 1; i < n_layers; ++i) {
    ad::Var<T> pre = tape.add_rowvec(tape.matmul_bt(h, net.weights[i]), net.biases[i]);
    h = (i + 1 < n_layers) ? tape.sin(tape.scale(pre, w0)) : pre;
  }
  return h;
}

template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> forward(const BasicSirenNetwork<T>& net,
                                            const Eigen::Matrix<T, 2, 1>& coords,
                                            const Eigen::Matrix<T, Eigen::Dynamic, 1>& z) {
  if (static_cast<std::size_t>(z.size()) != net.latent_dim) {
    throw InvariantError("forward: latent size mismatch");
  }
  if (!coords.allFinite() || !z.allFinite()) throw NumericError("forward: non-finite input");
  ad::Tape<T> tape(false);
  const auto bound = bind(tape, net, false);
  auto c = tape.constant(coords.transpose());
  auto zz = tape.constant(z.transpose());
  return forward(tape, bound, c, zz).value().row(0).transpose();
}

Eigen::MatrixXd predict(const SirenNetwork& net, std::span<const Direction> directions,
                        const Eigen::VectorXd& z) {
  if (static_cast<std::size_t>(z.size()) != net.latent_dim) {
    throw InvariantError("predict: latent size mismatch");
  }
  if (!z.allFinite()) throw NumericError("predict: non-finite latent");
  ad::Tape<double> tape(false);
  const auto bound = bind(tape, net, false);
  auto c = tape.constant(coordinate_matrix(directions));
  auto zz = tape.constant(z.transpose());
  return forward(tape, bound, c, zz).value();
}

template <typename T>
std::size_t EarObservations<T>::valid_rows() const {
  std::size_t n = 0;
  for (auto m : mask) n += m ? 1 : 0;
  return n;
}

template <typename T>
EarObservations<T> make_observations(const MagnitudeField& field, std::size_t padded_rows) {
  const auto L = field.rows();
  const auto rows = std::max(L, padded_rows);
  EarObservations<T> o;
  o.coords = ad::Matrix<T>::Zero(static_cast<Eigen::Index>(rows), 2);
  o.targets = ad::Matrix<T>::Zero(static_cast<Eigen::Index>(rows), field.values_db.cols());
  o.coords.topRows(static_cast<Eigen::Index>(L)) =
      coordinate_matrix(field.directions).cast<T>();
  o.targets.topRows(static_cast<Eigen::Index>(L)) = field.values_db.cast<T>();
  o.mask.assign(rows, 0);
  for (std::size_t i = 0; i < L; ++i) o.mask[i] = 1;
  return o;
}

template <typename T>
ad::Var<T> masked_mse(ad::Tape<T>& tape, ad::Var<T> pred, ad::Var<T> target, int mask,
                      std::size_t valid_rows) {
  const auto cells = valid_rows * static_cast<std::size_t>(pred.cols());
  if (cells == 0) throw InvariantError("masked_mse: no unmasked cells");
  auto r = tape.mask_rows(tape.sub(pred, target), mask);
  return tape.scale(tape.sum_all(tape.mul(r, r)), T(1) / static_cast<T>(cells));
}

namespace {

template <typename T>
void check_observations(const BasicSirenNetwork<T>& net, const EarObservations<T>& obs) {
  if (obs.coords.cols() != 2 || obs.coords.rows() != obs.targets.rows() ||
      static_cast<std::size_t>(obs.coords.rows()) != obs.mask.size()) {
    throw InvariantError("observations: inconsistent shapes");
  }
  if (static_cast<std::size_t>(obs.targets.cols()) != net.output_dim()) {
    throw InvariantError(fmt::format("observations: {} bins but network outputs {}",
                                     obs.targets.cols(), net.output_dim()));
  }
  if (obs.valid_rows() == 0) throw InvariantError("observations: no valid rows");
}

template <typename T>
ParamGradients<T> collect(ad::Tape<T>& tape, const BasicSirenNetwork<T>& net,
                          const BoundSiren<T>& bound, ad::Var<T> loss) {
  const auto leaves = bound.leaves();
  const auto grads = tape.grad(loss, leaves, false);
  ParamGradients<T> out;
  out.loss = loss.scalar();
  std::size_t g = 0;
  ad::Matrix<T> w0(net.layers[0].weight.rows(), net.layers[0].weight.cols());
  w0.leftCols(2) = grads[g++].value();
  if (net.latent_dim > 0) w0.rightCols(static_cast<Eigen::Index>(net.latent_dim)) = grads[g++].value();
  out.tensors.push_back(std::move(w0));
  out.tensors.push_back(grads[g++].value());
  for (std::size_t i = 1; i < net.layers.size(); ++i) {
    out.tensors.push_back(grads[g++].value());
    out.tensors.push_back(grads[g++].value());
  }
  return out;
}

}  // namespace

template <typename T>
ParamGradients<T> grad_params(const BasicSirenNetwork<T>& net, const EarObservations<T>& obs,
                              const Eigen::Matrix<T, Eigen::Dynamic, 1>& z) {
  check_observations(net, obs);
  if (static_cast<std::size_t>(z.size()) != net.latent_dim) {
    throw InvariantError("grad_params: latent size mismatch");
  }
  ad::Tape<T> tape(false);
  const auto bound = bind(tape, net, true);
  auto coords = tape.constant(obs.coords);
  auto target = tape.constant(obs.targets);
  auto zz = tape.constant(z.transpose());
  const int mask = tape.add_mask(obs.mask);
  auto loss = masked_mse(tape, forward(tape, bound, coords, zz), target, mask, obs.valid_rows());
  return collect(tape, net, bound, loss);
}

template <typename T>
LatentGradient<T> grad_latent(const BasicSirenNetwork<T>& net, const EarObservations<T>& obs,
                              const Eigen::Matrix<T, Eigen::Dynamic, 1>& z) {
  check_observations(net, obs);
  if (static_cast<std::size_t>(z.size()) != net.latent_dim) {
    throw InvariantError("grad_latent: latent size mismatch");
  }
  ad::Tape<T> tape(false);
  const auto bound = bind(tape, net, false);
  auto coords = tape.constant(obs.coords);
  auto target = tape.constant(obs.targets);
  auto zz = tape.leaf(z.transpose(), true);
  const int mask = tape.add_mask(obs.mask);
  auto loss = masked_mse(tape, forward(tape, bound, coords, zz), target, mask, obs.valid_rows());
  const std::vector<ad::Var<T>> wrt{zz};
  const auto g = tape.grad(loss, wrt, false);
  return {g[0].value().row(0).transpose(), loss.scalar()};
}

template <typename T>
LatentStepGradients<T> grad_params_through_latent_step(const BasicSirenNetwork<T>& net,
                                                       const EarObservations<T>& obs,
                                                       int latent_steps,
                                                       TapeCapability capability) {
  check_observations(net, obs);
  if (latent_steps < 0) throw InvariantError("latent_steps must be >= 0");
  ad::Tape<T> tape(capability == TapeCapability::HigherOrder);
  if (!tape.higher_order() && latent_steps > 0 && net.latent_dim > 0) {
    throw UnsupportedModeError(
        "differentiating through the latent step needs a higher-order tape");
  }
  const auto bound = bind(tape, net, true);
  auto coords = tape.constant(obs.coords);
  auto target = tape.constant(obs.targets);
  const int mask = tape.add_mask(obs.mask);
  const auto valid = obs.valid_rows();
  ad::Var<T> z = tape.leaf(ad::Matrix<T>::Zero(1, static_cast<Eigen::Index>(net.latent_dim)), true);
  if (net.latent_dim > 0) {
    for (int s = 0; s < latent_steps; ++s) {
      auto inner = masked_mse(tape, forward(tape, bound, coords, z), target, mask, valid);
      const std::vector<ad::Var<T>> wrt{z};
      auto g = tape.grad(inner, wrt, true);
      z = tape.sub(z, g[0]);
    }
  }
  auto loss = masked_mse(tape, forward(tape, bound, coords, z), target, mask, valid);
  LatentStepGradients<T> out;
  out.params = collect(tape, net, bound, loss);
  out.z = z.value().row(0).transpose();
  return out;
}

#define HRTF_FIELD_INSTANTIATE(T)                                                          \
  template struct BasicSirenNetwork<T>;                                                    \
  template void validate(const BasicSirenNetwork<T>&);                                     \
  template struct BoundSiren<T>;                                                           \
  template BoundSiren<T> bind(ad::Tape<T>&, const BasicSirenNetwork<T>&, bool);            \
  template ad::Var<T> forward(ad::Tape<T>&, const BoundSiren<T>&, ad::Var<T>, ad::Var<T>); \
  template Eigen::Matrix<T, Eigen::Dynamic, 1> forward(                                    \
      const BasicSirenNetwork<T>&, const Eigen::Matrix<T, 2, 1>&,                          \
      const Eigen::Matrix<T, Eigen::Dynamic, 1>&);                                         \
  template struct EarObservations<T>;                                                      \
  template EarObservations<T> make_observations(const MagnitudeField&, std::size_t);       \
  template ad::Var<T> masked_mse(ad::Tape<T>&, ad::Var<T>, ad::Var<T>, int, std::size_t);  \
  template ParamGradients<T> grad_params(const BasicSirenNetwork<T>&,                      \
                                         const EarObservations<T>&,                        \
                                         const Eigen::Matrix<T, Eigen::Dynamic, 1>&);      \
  template LatentGradient<T> grad_latent(const BasicSirenNetwork<T>&,                      \
                                         const EarObservations<T>&,                        \
                                         const Eigen::Matrix<T, Eigen::Dynamic, 1>&);      \
  template LatentStepGradients<T> grad_params_through_latent_step(                         \
      const BasicSirenNetwork<T>&, const EarObservations<T>&, int, TapeCapability);

HRTF_FIELD_INSTANTIATE(float)
HRTF_FIELD_INSTANTIATE(double)

#undef HRTF_FIELD_INSTANTIATE

}  // namespace hrtf_field
