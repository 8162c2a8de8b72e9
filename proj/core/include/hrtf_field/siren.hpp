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
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hrtf_field/autodiff.hpp"
#include "hrtf_field/hrtf_data.hpp"

namespace hrtf_field {

// Sine-activated MLP G(theta, phi, z). Every layer but the last computes
// sin(omega0 * (W h + b)); the last one is affine. The input is
// [theta~, phi~, z], so the first weight matrix has 2 + latent_dim columns.
template <typename T>
struct BasicSirenNetwork {
  struct Layer {
    ad::Matrix<T> weight;  // out x in
    ad::Matrix<T> bias;    // 1 x out
  };

  std::vector<Layer> layers;
  std::size_t latent_dim = 0;
  double omega0 = 30.0;

  std::size_t input_dim() const { return static_cast<std::size_t>(layers.front().weight.cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(layers.back().weight.rows()); }
  std::size_t n_hidden() const { return layers.size() - 1; }
  std::size_t hidden_dim() const {
    return layers.size() > 1 ? static_cast<std::size_t>(layers.front().weight.rows()) : 0;
  }
  std::size_t parameter_count() const;

  // W0, b0, W1, b1, ... in layer order.
  std::vector<ad::Matrix<T>*> parameter_refs();
  std::vector<const ad::Matrix<T>*> parameter_refs() const;

  template <typename U>
  BasicSirenNetwork<U> cast() const {
    BasicSirenNetwork<U> out;
    out.latent_dim = latent_dim;
    out.omega0 = omega0;
    for (const auto& l : layers) {
      out.layers.push_back({l.weight.template cast<U>(), l.bias.template cast<U>()});
    }
    return out;
  }
};

using SirenNetwork = BasicSirenNetwork<double>;

// Layer chaining, 2 + latent_dim inputs, finite parameters.
template <typename T>
void validate(const BasicSirenNetwork<T>& net);

struct SirenShape {
  std::size_t latent_dim = 32;
  std::size_t hidden_dim = 2048;
  std::size_t n_hidden = 2;
  std::size_t output_dim = 92;

  std::vector<std::size_t> layer_sizes() const;
};

// layer_sizes = {2 + D, hidden..., K}. First-layer weights ~ U(-1/n_in, 1/n_in),
// later weights ~ U(-sqrt(6/n_in)/omega0, +...), biases ~ U(-1/sqrt(n_in), +...).
SirenNetwork siren_init(std::span<const std::size_t> layer_sizes, double omega0,
                        std::uint64_t seed);
SirenNetwork siren_init(const SirenShape& shape, double omega0, std::uint64_t seed);

// Bound of the uniform weight distribution for a layer.
double siren_weight_bound(std::size_t layer_index, std::size_t fan_in, double omega0);

// (theta - 180) / 180 and phi / 90.
Eigen::Vector2d normalize_coordinates(const Direction& d);
Eigen::MatrixXd coordinate_matrix(std::span<const Direction> directions);

// Network parameters recorded as tape leaves. The first weight matrix is
// split into its coordinate and latent column blocks.
template <typename T>
struct BoundSiren {
  ad::Var<T> first_coord_weight;
  ad::Var<T> first_latent_weight;  // invalid when latent_dim == 0
  std::vector<ad::Var<T>> weights;  // weights[0] unused
  std::vector<ad::Var<T>> biases;
  double omega0 = 30.0;

  std::vector<ad::Var<T>> leaves() const;
};

template <typename T>
BoundSiren<T> bind(ad::Tape<T>& tape, const BasicSirenNetwork<T>& net, bool requires_grad);

// coords: L x 2 normalized coordinates, z: 1 x D. Returns L x K.
template <typename T>
ad::Var<T> forward(ad::Tape<T>& tape, const BoundSiren<T>& net, ad::Var<T> coords,
                   ad::Var<T> z);

// Single-point evaluation on normalized coordinates.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> forward(const BasicSirenNetwork<T>& net,
                                            const Eigen::Matrix<T, 2, 1>& coords,
                                            const Eigen::Matrix<T, Eigen::Dynamic, 1>& z);

// L x K prediction for directions in degrees.
Eigen::MatrixXd predict(const SirenNetwork& net, std::span<const Direction> directions,
                        const Eigen::VectorXd& z);

// One subject-ear's observations, padded to a common row count. Rows with
// mask == 0 are padding and never contribute to a loss or gradient.
template <typename T>
struct EarObservations {
  ad::Matrix<T> coords;   // rows x 2, normalized
  ad::Matrix<T> targets;  // rows x K, dB
  std::vector<std::uint8_t> mask;

  std::size_t valid_rows() const;
};

template <typename T>
EarObservations<T> make_observations(const MagnitudeField& field, std::size_t padded_rows = 0);

// Parameter-shaped gradients in parameter_refs() order, plus the loss value
// at which they were taken.
template <typename T>
struct ParamGradients {
  std::vector<ad::Matrix<T>> tensors;
  T loss{};
};

// Masked mean of squared differences over valid (row, bin) cells, recorded
// on the tape.
template <typename T>
ad::Var<T> masked_mse(ad::Tape<T>& tape, ad::Var<T> pred, ad::Var<T> target, int mask,
                      std::size_t valid_rows);

// d MSE / d params with z held fixed.
template <typename T>
ParamGradients<T> grad_params(const BasicSirenNetwork<T>& net, const EarObservations<T>& obs,
                              const Eigen::Matrix<T, Eigen::Dynamic, 1>& z);

template <typename T>
struct LatentGradient {
  Eigen::Matrix<T, Eigen::Dynamic, 1> gradient;
  T loss{};
};

// d MSE / d z.
template <typename T>
LatentGradient<T> grad_latent(const BasicSirenNetwork<T>& net, const EarObservations<T>& obs,
                              const Eigen::Matrix<T, Eigen::Dynamic, 1>& z);

enum class TapeCapability { FirstOrder, HigherOrder };

template <typename T>
struct LatentStepGradients {
  ParamGradients<T> params;
  Eigen::Matrix<T, Eigen::Dynamic, 1> z;
};

// Total derivative of MSE(x, G(., ., z(W))) where z(W) starts at the origin
// and takes `latent_steps` unit gradient steps, differentiating through those
// steps. Throws UnsupportedModeError on a first-order tape.
template <typename T>
LatentStepGradients<T> grad_params_through_latent_step(
    const BasicSirenNetwork<T>& net, const EarObservations<T>& obs, int latent_steps = 1,
    TapeCapability capability = TapeCapability::HigherOrder);

}  // namespace hrtf_field
