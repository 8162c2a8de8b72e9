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

#include <gtest/gtest.h>

#include "hrtf_field/errors.hpp"
#include "hrtf_field/igon.hpp"
#include "hrtf_field/preprocess.hpp"
#include "hrtf_field/synthetic.hpp"

namespace hrtf_field {
namespace {

std::vector<double> freqs(std::size_t k) {
  std::vector<double> f;
  for (std::size_t i = 0; i < k; ++i) f.push_back(200.0 * (i + 1));
  return f;
}

SirenNetwork small_net(std::size_t latent, std::size_t k = 4, std::uint64_t seed = 1) {
  SirenShape s;
  s.latent_dim = latent;
  s.hidden_dim = 12;
  s.n_hidden = 1;
  s.output_dim = k;
  return siren_init(s, 30.0, seed);
}

TEST(LearningRate, InverseTimeDecay) {
  TrainConfig cfg;
  EXPECT_DOUBLE_EQ(lr_schedule(0, cfg), 3e-4);
  EXPECT_DOUBLE_EQ(lr_schedule(100, cfg), 1.5e-4);
  EXPECT_DOUBLE_EQ(lr_schedule(300, cfg), 7.5e-5);
  EXPECT_THROW(lr_schedule(-1, cfg), InvariantError);
}

TEST(TrainConfig, DefaultsAndValidation) {
  TrainConfig cfg;
  EXPECT_EQ(cfg.epochs, 300);
  EXPECT_EQ(cfg.batch_size, 18);
  EXPECT_EQ(cfg.latent_dim, 32);
  EXPECT_EQ(cfg.grad_mode, GradMode::Exact);
  EXPECT_NO_THROW(validate(cfg));
  cfg.batch_size = 0;
  EXPECT_THROW(validate(cfg), InvariantError);
}

TEST(MaskedMse, WorkedExampleAndPaddingInvariance) {
  Eigen::MatrixXd pred(3, 2), target(3, 2);
  pred << 1, 2, 3, 4, 100, 100;
  target << 3, 4, 5, 6, 0, 0;
  const std::vector<std::uint8_t> mask{1, 1, 0};
  EXPECT_DOUBLE_EQ(masked_mse(pred, target, mask), 4.0);
  EXPECT_DOUBLE_EQ(masked_mse(pred.topRows(2), target.topRows(2), std::vector<std::uint8_t>{1, 1}),
                   4.0);
  EXPECT_THROW(masked_mse(pred, target, std::vector<std::uint8_t>{0, 0, 0}), InvariantError);
}

TEST(MakeBatch, PaddingDoesNotChangeGradients) {
  const auto net = small_net(3);
  const auto a = synth::smooth_pattern_field(synth::random_directions(5, 1), freqs(4), 1);
  const auto b = synth::smooth_pattern_field(synth::random_directions(9, 2), freqs(4), 2);
  const std::vector<const MagnitudeField*> members{&a, &b};
  const auto batch = make_batch<double>(members);
  EXPECT_EQ(batch.padded_rows, 9u);
  ASSERT_EQ(batch.ears[0].coords.rows(), 9);
  EXPECT_EQ(batch.ears[0].valid_rows(), 5u);
  const Eigen::VectorXd z = Eigen::VectorXd::Constant(3, 0.1);
  const auto padded = grad_params(net, batch.ears[0], z);
  const auto plain = grad_params(net, make_observations<double>(a), z);
  EXPECT_NEAR(padded.loss, plain.loss, 1e-14);
  for (std::size_t t = 0; t < plain.tensors.size(); ++t) {
    EXPECT_TRUE(padded.tensors[t].isApprox(plain.tensors[t], 1e-12));
  }
  EXPECT_TRUE(infer_latent(net, batch.ears[0], 2).isApprox(infer_latent(net, make_observations<double>(a), 2), 1e-12));
}

TEST(InferLatent, LinearNetworkHasClosedForm) {
  // A single affine layer: G = Wc c + Wz z + b.
  const std::vector<std::size_t> sizes{2 + 3, 4};
  const auto net = siren_init(sizes, 30.0, 5);
  ASSERT_EQ(net.latent_dim, 3u);
  const auto field = synth::smooth_pattern_field(synth::random_directions(6, 3), freqs(4), 3);
  const auto& W = net.layers[0].weight;
  const Eigen::MatrixXd Wc = W.leftCols(2), Wz = W.rightCols(3);
  const Eigen::RowVectorXd b = net.layers[0].bias;
  const Eigen::MatrixXd C = coordinate_matrix(field.directions);
  Eigen::VectorXd resid_sum = Eigen::VectorXd::Zero(4);
  for (Eigen::Index r = 0; r < C.rows(); ++r) {
    resid_sum += (field.values_db.row(r) - C.row(r) * Wc.transpose() - b).transpose();
  }
  const Eigen::VectorXd expected = (2.0 / (6.0 * 4.0)) * Wz.transpose() * resid_sum;
  EXPECT_TRUE(infer_latent(net, field, 1).values.isApprox(expected, 1e-12));
  EXPECT_EQ(infer_latent(net, field, 0).values, Eigen::VectorXd::Zero(3));
  EXPECT_THROW(infer_latent(net, field, -1), InvariantError);
}

TEST(InferLatent, ShiftingTargetsAndOutputBiasTogetherKeepsLatent) {
  auto net = small_net(3);
  const auto field = synth::smooth_pattern_field(synth::random_directions(8, 4), freqs(4), 4);
  const auto z = infer_latent(net, field, 2).values;
  auto shifted = field;
  shifted.values_db.array() += 6.0;
  net.layers.back().bias.array() += 6.0;
  EXPECT_TRUE(infer_latent(net, shifted, 2).values.isApprox(z, 1e-9));
}

TEST(Adam, ScalarTwoStepRecurrence) {
  ad::Matrix<double> p(1, 1);
  p(0, 0) = 1.0;
  AdamState<double> s;
  std::vector<ad::Matrix<double>*> refs{&p};
  std::vector<ad::Matrix<double>> g{ad::Matrix<double>::Constant(1, 1, 0.5)};
  adam_step<double>(refs, g, s, 0.1);
  EXPECT_NEAR(p(0, 0), 0.900000002, 1e-15);
  g[0](0, 0) = -0.25;
  adam_step<double>(refs, g, s, 0.1);
  EXPECT_NEAR(p(0, 0), 0.8733662987078463, 1e-15);
  EXPECT_EQ(s.step, 2);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  ad::Matrix<double> p = ad::Matrix<double>::Random(2, 3);
  const auto before = p;
  AdamState<double> s;
  std::vector<ad::Matrix<double>*> refs{&p};
  std::vector<ad::Matrix<double>> g{ad::Matrix<double>::Zero(2, 3)};
  adam_step<double>(refs, g, s, 0.1);
  EXPECT_EQ(p, before);
  std::vector<ad::Matrix<double>> wrong{ad::Matrix<double>::Zero(3, 2)};
  EXPECT_THROW(adam_step<double>(refs, wrong, s, 0.1), InvariantError);
}

TEST(GradMode, ExactEqualsDetachedWithoutLatentWeights) {
  auto net = small_net(3);
  net.layers[0].weight.rightCols(3).setZero();
  const auto field = synth::smooth_pattern_field(synth::random_directions(6, 5), freqs(4), 5);
  const std::vector<const MagnitudeField*> members{&field};
  const auto batch = make_batch<double>(members);
  TrainConfig exact, detached;
  detached.grad_mode = GradMode::Detached;
  const auto ge = batch_gradients(net, batch, exact);
  const auto gd = batch_gradients(net, batch, detached);
  for (std::size_t t = 0; t < ge.tensors.size(); ++t) EXPECT_EQ(ge.tensors[t], gd.tensors[t]);
}

TEST(GradMode, ExactDiffersFromDetachedInGeneral) {
  const auto net = small_net(3);
  const auto field = synth::smooth_pattern_field(synth::random_directions(6, 6), freqs(4), 6);
  const std::vector<const MagnitudeField*> members{&field};
  const auto batch = make_batch<double>(members);
  TrainConfig exact, detached;
  detached.grad_mode = GradMode::Detached;
  const auto ge = batch_gradients(net, batch, exact);
  const auto gd = batch_gradients(net, batch, detached);
  EXPECT_DOUBLE_EQ(ge.loss, gd.loss);
  EXPECT_FALSE(ge.tensors[0].isApprox(gd.tensors[0], 1e-9));
}

std::vector<MagnitudeField> toy_ears(int n) {
  std::vector<MagnitudeField> ears;
  const auto dirs = synth::uniform_ring_grid(3, 8, -30, 30);
  for (int i = 0; i < n; ++i) ears.push_back(synth::smooth_pattern_field(dirs, freqs(4), 10 + i));
  return ears;
}

TEST(Train, SameSeedSameWeightsAcrossThreadCounts) {
  const auto ears = toy_ears(4);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 2;
  cfg.latent_dim = 3;
  cfg.precision = Precision::F64;
  cfg.seed = 7;
  const auto init = small_net(3);
  const auto a = train(init, ears, cfg);
  cfg.threads = 2;
  const auto b = train(init, ears, cfg);
  ASSERT_EQ(a.history.size(), 3u);
  for (std::size_t l = 0; l < init.layers.size(); ++l) {
    EXPECT_EQ(a.network.layers[l].weight, b.network.layers[l].weight);
    EXPECT_EQ(a.network.layers[l].bias, b.network.layers[l].bias);
  }
  cfg.seed = 8;
  const auto c = train(init, ears, cfg);
  EXPECT_NE(a.network.layers[0].weight, c.network.layers[0].weight);
}

TEST(Train, LossDecreasesAndCallbackRuns) {
  const auto ears = toy_ears(3);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 1;
  cfg.latent_dim = 16;
  cfg.lr0 = 1e-3;
  SirenShape shape;
  shape.latent_dim = 16;
  shape.hidden_dim = 32;
  shape.n_hidden = 1;
  shape.output_dim = 4;
  int calls = 0;
  const auto r = train(siren_init(shape, 30.0, 1), ears, cfg,
                       [&](const EpochReport& rep, const SirenNetwork&) {
                         EXPECT_EQ(rep.epoch, calls);
                         ++calls;
                       });
  EXPECT_EQ(calls, 200);
  EXPECT_LT(r.history.back().mean_loss, 0.7 * r.history.front().mean_loss);
  EXPECT_DOUBLE_EQ(r.history[10].lr, lr_schedule(10, cfg));
}

TEST(Train, RejectsMismatchedInputs) {
  const auto ears = toy_ears(1);
  TrainConfig cfg;
  cfg.latent_dim = 3;
  EXPECT_THROW(train(small_net(2), ears, cfg), InvariantError);
  EXPECT_THROW(train(small_net(3, 5), ears, cfg), InvariantError);
  EXPECT_THROW(train(small_net(3), std::vector<MagnitudeField>{}, cfg), InvariantError);
}

}  // namespace
}  // namespace hrtf_field
