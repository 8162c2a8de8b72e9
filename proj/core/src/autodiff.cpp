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

#include "hrtf_field/autodiff.hpp"

#include <string>

namespace hrtf_field::ad {

template <typename T>
void Tape<T>::check(Var<T> v) const {
  if (v.tape() != this || v.id() < 0 || static_cast<std::size_t>(v.id()) >= nodes_.size()) {
    throw InvariantError("variable does not belong to this tape");
  }
}

template <typename T>
Var<T> Tape<T>::push(Op op, Matrix<T> value, int a, int b, T scalar, int mask) {
  Node n;
  n.value = std::move(value);
  n.op = op;
  n.a = a;
  n.b = b;
  n.scalar = scalar;
  n.mask = mask;
  if (recording_) {
    n.requires_grad = (a >= 0 && nodes_[static_cast<std::size_t>(a)].requires_grad) ||
                      (b >= 0 && nodes_[static_cast<std::size_t>(b)].requires_grad);
  }
  nodes_.push_back(std::move(n));
  return Var<T>(this, static_cast<int>(nodes_.size() - 1));
}

template <typename T>
Var<T> Tape<T>::leaf(Matrix<T> value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var<T>(this, static_cast<int>(nodes_.size() - 1));
}

template <typename T>
int Tape<T>::add_mask(std::vector<std::uint8_t> mask) {
  masks_.push_back(std::move(mask));
  return static_cast<int>(masks_.size() - 1);
}

namespace {

[[noreturn]] void shape_error(const char* op, Eigen::Index ar, Eigen::Index ac,
                              Eigen::Index br, Eigen::Index bc) {
  throw InvariantError(std::string(op) + ": shape mismatch " + std::to_string(ar) + "x" +
                       std::to_string(ac) + " vs " + std::to_string(br) + "x" +
                       std::to_string(bc));
}

template <typename M>
void same_shape(const char* op, const M& a, const M& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    shape_error(op, a.rows(), a.cols(), b.rows(), b.cols());
  }
}

}  // namespace

template <typename T>
Var<T> Tape<T>::matmul(Var<T> a, Var<T> b) {
  check(a);
  check(b);
  const auto& A = a.value();
  const auto& B = b.value();
  if (A.cols() != B.rows()) shape_error("matmul", A.rows(), A.cols(), B.rows(), B.cols());
  Matrix<T> v = A * B;
  return push(Op::MatMul, std::move(v), a.id(), b.id());
}

template <typename T>
Var<T> Tape<T>::matmul_bt(Var<T> a, Var<T> b) {
  check(a);
  check(b);
  const auto& A = a.value();
  const auto& B = b.value();
  if (A.cols() != B.cols()) shape_error("matmul_bt", A.rows(), A.cols(), B.rows(), B.cols());
  Matrix<T> v = A * B.transpose();
  return push(Op::MatMulBt, std::move(v), a.id(), b.id());
}

template <typename T>
Var<T> Tape<T>::matmul_at(Var<T> a, Var<T> b) {
  check(a);
  check(b);
  const auto& A = a.value();
  const auto& B = b.value();
  if (A.rows() != B.rows()) shape_error("matmul_at", A.rows(), A.cols(), B.rows(), B.cols());
  Matrix<T> v = A.transpose() * B;
  return push(Op::MatMulAt, std::move(v), a.id(), b.id());
}

template <typename T>
Var<T> Tape<T>::add(Var<T> a, Var<T> b) {
  check(a);
  check(b);
  same_shape("add", a.value(), b.value());
  Matrix<T> v = a.value() + b.value();
  return push(Op::Add, std::move(v), a.id(), b.id());
}

template <typename T>
Var<T> Tape<T>::sub(Var<T> a, Var<T> b) {
  check(a);
  check(b);
  same_shape("sub", a.value(), b.value());
  Matrix<T> v = a.value() - b.value();
  return push(Op::Sub, std::move(v), a.id(), b.id());
}

template <typename T>
Var<T> Tape<T>::mul(Var<T> a, Var<T> b) {
  check(a);
  check(b);
  same_shape("mul", a.value(), b.value());
  Matrix<T> v = a.value().cwiseProduct(b.value());
  return push(Op::Mul, std::move(v), a.id(), b.id());
}

template <typename T>
Var<T> Tape<T>::neg(Var<T> a) {
  check(a);
  Matrix<T> v = -a.value();
  return push(Op::Neg, std::move(v), a.id());
}

template <typename T>
Var<T> Tape<T>::scale(Var<T> a, T s) {
  check(a);
  Matrix<T> v = s * a.value();
  return push(Op::Scale, std::move(v), a.id(), -1, s);
}

template <typename T>
Var<T> Tape<T>::sin(Var<T> a) {
  check(a);
  Matrix<T> v = a.value().array().sin().matrix();
  return push(Op::Sin, std::move(v), a.id());
}

template <typename T>
Var<T> Tape<T>::cos(Var<T> a) {
  check(a);
  Matrix<T> v = a.value().array().cos().matrix();
  return push(Op::Cos, std::move(v), a.id());
}

template <typename T>
Var<T> Tape<T>::add_rowvec(Var<T> a, Var<T> row) {
  check(a);
  check(row);
  const auto& A = a.value();
  const auto& R = row.value();
  if (R.rows() != 1 || R.cols() != A.cols()) {
    shape_error("add_rowvec", A.rows(), A.cols(), R.rows(), R.cols());
  }
  Matrix<T> v = A.rowwise() + R.row(0);
  return push(Op::AddRowVec, std::move(v), a.id(), row.id());
}

template <typename T>
Var<T> Tape<T>::colsum(Var<T> a) {
  check(a);
  Matrix<T> v = a.value().colwise().sum();
  return push(Op::ColSum, std::move(v), a.id());
}

template <typename T>
Var<T> Tape<T>::broadcast_rows(Var<T> row, Eigen::Index n) {
  check(row);
  const auto& R = row.value();
  if (R.rows() != 1) shape_error("broadcast_rows", R.rows(), R.cols(), 1, R.cols());
  Matrix<T> v = R.replicate(n, 1);
  return push(Op::BroadcastRows, std::move(v), row.id());
}

template <typename T>
Var<T> Tape<T>::sum_all(Var<T> a) {
  check(a);
  Matrix<T> v(1, 1);
  v(0, 0) = a.value().sum();
  return push(Op::SumAll, std::move(v), a.id());
}

template <typename T>
Var<T> Tape<T>::broadcast_scalar(Var<T> s, Eigen::Index rows, Eigen::Index cols) {
  check(s);
  if (s.rows() != 1 || s.cols() != 1) shape_error("broadcast_scalar", s.rows(), s.cols(), 1, 1);
  Matrix<T> v = Matrix<T>::Constant(rows, cols, s.scalar());
  return push(Op::BroadcastScalar, std::move(v), s.id());
}

template <typename T>
Var<T> Tape<T>::mask_rows(Var<T> a, int mask) {
  check(a);
  if (mask < 0 || static_cast<std::size_t>(mask) >= masks_.size()) {
    throw InvariantError("mask_rows: unknown mask");
  }
  const auto& m = masks_[static_cast<std::size_t>(mask)];
  const auto& A = a.value();
  if (static_cast<Eigen::Index>(m.size()) != A.rows()) {
    shape_error("mask_rows", A.rows(), A.cols(), static_cast<Eigen::Index>(m.size()), 1);
  }
  Matrix<T> v = Matrix<T>::Zero(A.rows(), A.cols());
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    if (m[static_cast<std::size_t>(r)]) v.row(r) = A.row(r);
  }
  return push(Op::MaskRows, std::move(v), a.id(), -1, T{}, mask);
}

template <typename T>
void Tape<T>::backward_node(const Node& node, Var<T> g, Var<T>& ga, Var<T>& gb) {
  // `node` may dangle once anything is pushed; copy what the rules need.
  const Op op = node.op;
  const Var<T> a(this, node.a);
  const Var<T> b(this, node.b);
  const T s = node.scalar;
  const int mask = node.mask;
  const bool need_a = node.a >= 0 && nodes_[static_cast<std::size_t>(node.a)].requires_grad;
  const bool need_b = node.b >= 0 && nodes_[static_cast<std::size_t>(node.b)].requires_grad;
  const Eigen::Index a_rows = need_a ? a.rows() : 0;
  const Eigen::Index a_cols = need_a ? a.cols() : 0;

  switch (op) {
    case Op::Leaf:
      break;
    case Op::MatMul:
      if (need_a) ga = matmul_bt(g, b);
      if (need_b) gb = matmul_at(a, g);
      break;
    case Op::MatMulBt:
      if (need_a) ga = matmul(g, b);
      if (need_b) gb = matmul_at(g, a);
      break;
    case Op::MatMulAt:
      if (need_a) ga = matmul_bt(b, g);
      if (need_b) gb = matmul(a, g);
      break;
    case Op::Add:
      if (need_a) ga = g;
      if (need_b) gb = g;
      break;
    case Op::Sub:
      if (need_a) ga = g;
      if (need_b) gb = neg(g);
      break;
    case Op::Mul:
      if (need_a) ga = mul(g, b);
      if (need_b) gb = mul(g, a);
      break;
    case Op::Neg:
      if (need_a) ga = neg(g);
      break;
    case Op::Scale:
      if (need_a) ga = scale(g, s);
      break;
    case Op::Sin:
      if (need_a) ga = mul(g, cos(a));
      break;
    case Op::Cos:
      if (need_a) ga = neg(mul(g, sin(a)));
      break;
    case Op::AddRowVec:
      if (need_a) ga = g;
      if (need_b) gb = colsum(g);
      break;
    case Op::ColSum:
      if (need_a) ga = broadcast_rows(g, a_rows);
      break;
    case Op::BroadcastRows:
      if (need_a) ga = colsum(g);
      break;
    case Op::SumAll:
      if (need_a) ga = broadcast_scalar(g, a_rows, a_cols);
      break;
    case Op::BroadcastScalar:
      if (need_a) ga = sum_all(g);
      break;
    case Op::MaskRows:
      if (need_a) ga = mask_rows(g, mask);
      break;
  }
}

template <typename T>
std::vector<Var<T>> Tape<T>::grad(Var<T> y, std::span<const Var<T>> wrt, bool create_graph) {
  check(y);
  for (const auto& w : wrt) check(w);
  if (y.rows() != 1 || y.cols() != 1) throw InvariantError("grad: output must be 1x1");
  if (create_graph && !higher_order_) {
    throw UnsupportedModeError("grad: this tape was built without higher-order support");
  }

  struct RecordingScope {
    bool& flag;
    bool saved;
    ~RecordingScope() { flag = saved; }
  } scope{recording_, recording_};
  recording_ = create_graph;
  const std::size_t n = static_cast<std::size_t>(y.id()) + 1;
  std::vector<int> adj(n, -1);

  auto accumulate = [&](int target, Var<T> g) {
    auto& slot = adj[static_cast<std::size_t>(target)];
    slot = slot < 0 ? g.id() : add(Var<T>(this, slot), g).id();
  };

  if (nodes_[n - 1].requires_grad) {
    accumulate(y.id(), leaf(Matrix<T>::Ones(1, 1), false));
  }
  for (std::size_t i = n; i-- > 0;) {
    if (adj[i] < 0 || !nodes_[i].requires_grad || nodes_[i].op == Op::Leaf) continue;
    const int a = nodes_[i].a;
    const int b = nodes_[i].b;
    Var<T> ga, gb;
    backward_node(nodes_[i], Var<T>(this, adj[i]), ga, gb);
    if (ga.valid()) accumulate(a, ga);
    if (gb.valid()) accumulate(b, gb);
  }

  std::vector<Var<T>> out;
  out.reserve(wrt.size());
  for (const auto& w : wrt) {
    const auto id = static_cast<std::size_t>(w.id());
    if (id < n && adj[id] >= 0) {
      out.emplace_back(this, adj[id]);
    } else {
      out.push_back(leaf(Matrix<T>::Zero(w.rows(), w.cols()), false));
    }
  }
  return out;
}

template class Tape<float>;
template class Tape<double>;

}  // namespace hrtf_field::ad
