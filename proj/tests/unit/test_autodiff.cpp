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

#include <functional>
#include <string>

#include "hrtf_field/autodiff.hpp"
#include "hrtf_field/errors.hpp"

namespace hrtf_field::ad {
namespace {

using Mat = Matrix<double>;
using Fn = std::function<Var<double>(Tape<double>&, std::vector<Var<double>>&)>;

Mat random_mat(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::srand(seed);
  return Mat::Random(r, c);
}

// Scalar objective: sum(W .* f(inputs)) with a fixed random W.
double objective(const Fn& f, const std::vector<Mat>& inputs, const Mat& w) {
  Tape<double> t(false);
  std::vector<Var<double>> vars;
  for (const auto& m : inputs) vars.push_back(t.leaf(m, false));
  return (f(t, vars).value().array() * w.array()).sum();
}

void check_gradients(const std::string& name, const Fn& f, std::vector<Mat> inputs) {
  Mat w;
  {
    Tape<double> t;
    std::vector<Var<double>> vars;
    for (const auto& m : inputs) vars.push_back(t.leaf(m, true));
    const auto out = f(t, vars);
    w = random_mat(out.rows(), out.cols(), 99);
  }
  Tape<double> t;
  std::vector<Var<double>> vars;
  for (const auto& m : inputs) vars.push_back(t.leaf(m, true));
  const auto out = f(t, vars);
  const auto y = t.sum_all(t.mul(out, t.constant(w)));
  const auto grads = t.grad(y, vars);
  const double h = 1e-6;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (Eigen::Index k = 0; k < inputs[i].size(); ++k) {
      auto plus = inputs;
      auto minus = inputs;
      plus[i].data()[k] += h;
      minus[i].data()[k] -= h;
      const double fd = (objective(f, plus, w) - objective(f, minus, w)) / (2 * h);
      EXPECT_NEAR(grads[i].value().data()[k], fd, 1e-7 * (1.0 + std::abs(fd)))
          << name << " input " << i << " entry " << k;
    }
  }
}

TEST(Autodiff, EveryOpMatchesFiniteDifferences) {
  const Mat a = random_mat(3, 4, 1), b = random_mat(4, 2, 2), c = random_mat(3, 4, 3);
  const Mat bt = random_mat(5, 4, 4), at = random_mat(3, 5, 5), row = random_mat(1, 4, 6);
  const Mat s = random_mat(1, 1, 7);
  check_gradients("matmul", [](auto& t, auto& v) { return t.matmul(v[0], v[1]); }, {a, b});
  check_gradients("matmul_bt", [](auto& t, auto& v) { return t.matmul_bt(v[0], v[1]); }, {a, bt});
  check_gradients("matmul_at", [](auto& t, auto& v) { return t.matmul_at(v[0], v[1]); }, {a, at});
  check_gradients("add", [](auto& t, auto& v) { return t.add(v[0], v[1]); }, {a, c});
  check_gradients("sub", [](auto& t, auto& v) { return t.sub(v[0], v[1]); }, {a, c});
  check_gradients("mul", [](auto& t, auto& v) { return t.mul(v[0], v[1]); }, {a, c});
  check_gradients("neg", [](auto& t, auto& v) { return t.neg(v[0]); }, {a});
  check_gradients("scale", [](auto& t, auto& v) { return t.scale(v[0], -2.5); }, {a});
  check_gradients("sin", [](auto& t, auto& v) { return t.sin(t.scale(v[0], 3.0)); }, {a});
  check_gradients("cos", [](auto& t, auto& v) { return t.cos(t.scale(v[0], 3.0)); }, {a});
  check_gradients("add_rowvec", [](auto& t, auto& v) { return t.add_rowvec(v[0], v[1]); },
                  {a, row});
  check_gradients("colsum", [](auto& t, auto& v) { return t.colsum(v[0]); }, {a});
  check_gradients("broadcast_rows", [](auto& t, auto& v) { return t.broadcast_rows(v[0], 3); },
                  {row});
  check_gradients("sum_all", [](auto& t, auto& v) { return t.sum_all(v[0]); }, {a});
  check_gradients("broadcast_scalar",
                  [](auto& t, auto& v) { return t.broadcast_scalar(v[0], 2, 3); }, {s});
  check_gradients("mask_rows",
                  [](auto& t, auto& v) { return t.mask_rows(v[0], t.add_mask({1, 0, 1})); },
                  {a});
  check_gradients("composite",
                  [](auto& t, auto& v) {
                    return t.sin(t.add_rowvec(t.matmul(v[0], v[1]), t.colsum(v[2])));
                  },
                  {a, b, random_mat(3, 2, 8)});
}

TEST(Autodiff, MaskRowsZeroesMaskedRows) {
  Tape<double> t;
  const auto x = t.leaf(Mat::Ones(3, 2), true);
  const auto m = t.mask_rows(x, t.add_mask({1, 0, 1}));
  EXPECT_EQ(m.value().row(1).norm(), 0.0);
  EXPECT_EQ(m.value().row(2), Mat::Ones(1, 2));
  EXPECT_THROW(t.mask_rows(x, 7), InvariantError);
}

// g(x) = grad_x sum(W .* sin(A x)); h(x) = sum(V .* g(x)).
double second_order_objective(const Mat& x, const Mat& a, const Mat& w, const Mat& v) {
  Tape<double> t;
  const auto xv = t.leaf(x, true);
  const auto y = t.sum_all(t.mul(t.sin(t.matmul(t.constant(a), xv)), t.constant(w)));
  const auto g = t.grad(y, std::vector<Var<double>>{xv}, true)[0];
  return (g.value().array() * v.array()).sum();
}

TEST(Autodiff, GradOfGradMatchesFiniteDifferences) {
  const Mat a = random_mat(4, 3, 11), x = random_mat(3, 2, 12);
  const Mat w = random_mat(4, 2, 13), v = random_mat(3, 2, 14);
  Tape<double> t;
  const auto xv = t.leaf(x, true);
  const auto y = t.sum_all(t.mul(t.sin(t.matmul(t.constant(a), xv)), t.constant(w)));
  const auto g = t.grad(y, std::vector<Var<double>>{xv}, true)[0];
  // Analytic first gradient: A^T (W .* cos(A x)).
  const Mat g_ref = a.transpose() * (w.array() * (a * x).array().cos()).matrix();
  EXPECT_TRUE(g.value().isApprox(g_ref, 1e-12));
  const auto h = t.sum_all(t.mul(g, t.constant(v)));
  const auto hx = t.grad(h, std::vector<Var<double>>{xv})[0];
  const double eps = 1e-6;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Mat p = x, m = x;
    p.data()[k] += eps;
    m.data()[k] -= eps;
    const double fd =
        (second_order_objective(p, a, w, v) - second_order_objective(m, a, w, v)) / (2 * eps);
    EXPECT_NEAR(hx.value().data()[k], fd, 1e-7 * (1.0 + std::abs(fd)));
  }
}

TEST(Autodiff, UnusedInputGetsZeroGradient) {
  Tape<double> t;
  const auto x = t.leaf(Mat::Ones(2, 2), true);
  const auto u = t.leaf(Mat::Ones(3, 1), true);
  const auto y = t.sum_all(x);
  const auto g = t.grad(y, std::vector<Var<double>>{x, u});
  EXPECT_EQ(g[1].value(), Mat::Zero(3, 1));
}

TEST(Autodiff, FirstOrderTapeRefusesCreateGraph) {
  Tape<double> t(false);
  const auto x = t.leaf(Mat::Ones(1, 1), true);
  const auto y = t.sum_all(t.sin(x));
  EXPECT_THROW(t.grad(y, std::vector<Var<double>>{x}, true), UnsupportedModeError);
  EXPECT_NO_THROW(t.grad(y, std::vector<Var<double>>{x}, false));
}

TEST(Autodiff, ShapeErrors) {
  Tape<double> t;
  const auto a = t.leaf(Mat::Ones(2, 3));
  const auto b = t.leaf(Mat::Ones(2, 3));
  EXPECT_THROW(t.matmul(a, b), InvariantError);
  EXPECT_THROW(t.grad(a, std::vector<Var<double>>{b}), InvariantError);
  Tape<double> other;
  const auto c = other.leaf(Mat::Ones(2, 3));
  EXPECT_THROW(t.add(a, c), InvariantError);
}

TEST(Autodiff, FloatTapeAgreesWithDouble) {
  const Mat a = random_mat(3, 3, 21);
  Tape<float> tf;
  const auto xf = tf.leaf(a.cast<float>(), true);
  const auto yf = tf.sum_all(tf.sin(xf));
  const auto gf = tf.grad(yf, std::vector<Var<float>>{xf})[0];
  EXPECT_TRUE(gf.value().cast<double>().isApprox(Mat(a.array().cos()), 1e-6));
}

}  // namespace
}  // namespace hrtf_field::ad
