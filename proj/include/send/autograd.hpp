// Copyright (c) 2026 The send-diar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEND_AUTOGRAD_HPP_
#define SEND_AUTOGRAD_HPP_

#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "send/tensor.hpp"

namespace send {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  // Empty (0x0) until backward has reached this node.
  const Tensor& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Records operations in execution order, which is a topological order of
/// the computation graph. backward() walks it once in reverse.
///
/// Single-threaded. Distinct tapes can be used concurrently.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value);
  Var constant(Tensor value);

  /// Appends a node. The backward function is dropped when no parent
  /// requires a gradient.
  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn fn);
  Var record(Tensor value, std::span<const Var> parents, BackwardFn fn);

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates.
  void backward(Var root);

  const Tensor& value(int id) const { return nodes_[id].value; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// grad[id] += g, allocating on first use. No-op for constants.
  template <typename Derived>
  void accumulate(int id, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  // Mutable gradient buffer, zero-initialised on first access.
  Tensor& grad_buffer(int id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };
  // deque keeps references to existing nodes stable across appends.
  std::deque<Node> nodes_;
};

Var matmul(Var a, Var b);
// a * b^T
Var matmul_nt(Var a, Var b);
// x * w^T + bias, bias a 1 x out row broadcast over rows.
Var linear(Var x, Var w, Var bias);
Var linear(Var x, Var w);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var add_row(Var x, Var row);
Var scale(Var x, double s);
Var relu(Var x);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }

Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var x, Eigen::Index begin, Eigen::Index count);
Var slice_rows(Var x, Eigen::Index begin, Eigen::Index count);

Var sum(Var x);
Var mean(Var x);

Var softmax_rows(Var x);
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

/// Mean over frames of -log softmax(logits)[t, target_t].
Var cross_entropy(Var logits, std::span<const int> targets);

/// Mean sigmoid binary cross-entropy over all entries, softplus form.
Var binary_cross_entropy(Var logits, const LabelMatrix& targets);

}  // namespace send

#endif  // SEND_AUTOGRAD_HPP_
