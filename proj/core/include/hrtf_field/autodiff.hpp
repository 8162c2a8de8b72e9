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
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hrtf_field/errors.hpp"

// Reverse-mode differentiation over dense matrices. Every backward rule is
// itself written with tape operations, so a gradient computed with
// create_graph = true is an ordinary tape value that can be differentiated
// again (grad of grad).
namespace hrtf_field::ad {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

enum class Op : std::uint8_t {
  Leaf,
  MatMul,          // A B
  MatMulBt,        // A B^T
  MatMulAt,        // A^T B
  Add,
  Sub,
  Mul,             // elementwise
  Neg,
  Scale,           // s A, s a constant
  Sin,
  Cos,
  AddRowVec,       // A + 1 r, r is 1 x n
  ColSum,          // 1^T A
  BroadcastRows,   // 1 r with a fixed row count
  SumAll,          // 1 x 1
  BroadcastScalar, // s 1 1^T with a fixed shape
  MaskRows,        // rows with mask == 0 replaced by zeros
};

template <typename T>
class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// tape is alive.
template <typename T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, int id) : tape_(tape), id_(id) {}

  const Matrix<T>& value() const { return tape_->value(id_); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  T scalar() const { return value()(0, 0); }
  bool requires_grad() const { return tape_->requires_grad(id_); }
  int id() const noexcept { return id_; }
  Tape<T>* tape() const noexcept { return tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape<T>* tape_ = nullptr;
  int id_ = -1;
};

template <typename T>
class Tape {
 public:
  // A first-order tape refuses create_graph = true.
  explicit Tape(bool higher_order = true) : higher_order_(higher_order) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool higher_order() const noexcept { return higher_order_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var<T> leaf(Matrix<T> value, bool requires_grad = false);
  Var<T> constant(Matrix<T> value) { return leaf(std::move(value), false); }

  // Row masks are stored once and referenced by index from MaskRows nodes.
  int add_mask(std::vector<std::uint8_t> mask);

  Var<T> matmul(Var<T> a, Var<T> b);
  Var<T> matmul_bt(Var<T> a, Var<T> b);
  Var<T> matmul_at(Var<T> a, Var<T> b);
  Var<T> add(Var<T> a, Var<T> b);
  Var<T> sub(Var<T> a, Var<T> b);
  Var<T> mul(Var<T> a, Var<T> b);
  Var<T> neg(Var<T> a);
  Var<T> scale(Var<T> a, T s);
  Var<T> sin(Var<T> a);
  Var<T> cos(Var<T> a);
  Var<T> add_rowvec(Var<T> a, Var<T> row);
  Var<T> colsum(Var<T> a);
  Var<T> broadcast_rows(Var<T> row, Eigen::Index n);
  Var<T> sum_all(Var<T> a);
  Var<T> broadcast_scalar(Var<T> s, Eigen::Index rows, Eigen::Index cols);
  Var<T> mask_rows(Var<T> a, int mask);

  // Gradients of the 1 x 1 value y with respect to each of wrt. Inputs y does
  // not depend on get a zero constant. With create_graph the results are
  // differentiable tape values.
  std::vector<Var<T>> grad(Var<T> y, std::span<const Var<T>> wrt, bool create_graph = false);

  const Matrix<T>& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires_grad(int id) const {
    return nodes_[static_cast<std::size_t>(id)].requires_grad;
  }

 private:
  struct Node {
    Matrix<T> value;
    Op op = Op::Leaf;
    int a = -1;
    int b = -1;
    T scalar{};
    int mask = -1;
    bool requires_grad = false;
  };

  Var<T> push(Op op, Matrix<T> value, int a, int b = -1, T scalar = T{}, int mask = -1);
  void check(Var<T> v) const;
  void backward_node(const Node& n, Var<T> g, Var<T>& ga, Var<T>& gb);

  std::vector<Node> nodes_;
  std::vector<std::vector<std::uint8_t>> masks_;
  bool higher_order_;
  bool recording_ = true;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace hrtf_field::ad
