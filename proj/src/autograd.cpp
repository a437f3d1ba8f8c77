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

#include "send/autograd.hpp"

#include <cmath>
#include <string>

namespace send {

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }

Var Tape::leaf(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor(), true, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor(), false, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents,
                 BackwardFn fn) {
  return record(std::move(value),
                std::span<const Var>(parents.begin(), parents.size()),
                std::move(fn));
}

Var Tape::record(Tensor value, std::span<const Var> parents, BackwardFn fn) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.tape() != this) {
      throw Error("autograd: operand recorded on a different tape");
    }
    needs = needs || nodes_[p.id()].requires_grad;
  }
  nodes_.push_back(
      Node{std::move(value), Tensor(), needs, needs ? std::move(fn) : nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor& Tape::grad_buffer(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) {
    n.grad = Tensor::Zero(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

void Tape::backward(Var root) {
  if (root.tape() != this) throw Error("autograd: root not on this tape");
  if (root.rows() != 1 || root.cols() != 1) {
    throw DimensionError("backward: root must be 1x1, got " +
                         shape_str(root.rows(), root.cols()));
  }
  if (!nodes_[root.id()].requires_grad) return;
  accumulate(root.id(), Tensor::Ones(1, 1));
  for (int id = root.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.backward && n.grad.size() != 0) n.backward(*this, id);
  }
}

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_str(a.rows(), a.cols()) + " vs " +
                         shape_str(b.rows(), b.cols()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: inner dimensions differ " +
                         shape_str(av.rows(), av.cols()) + " x " +
                         shape_str(bv.rows(), bv.cols()));
  }
  Tensor out = av * bv;
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var matmul_nt(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.cols()) {
    throw DimensionError("matmul_nt: inner dimensions differ " +
                         shape_str(av.rows(), av.cols()) + " x " +
                         shape_str(bv.cols(), bv.rows()));
  }
  Tensor out = av * bv.transpose();
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib));
    if (t.requires_grad(ib)) t.accumulate(ib, g.transpose() * t.value(ia));
  });
}

Var linear(Var x, Var w) { return matmul_nt(x, w); }

Var linear(Var x, Var w, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = bias.value();
  if (xv.cols() != wv.cols()) {
    throw DimensionError("linear: input width " + std::to_string(xv.cols()) +
                         " does not match weight " +
                         shape_str(wv.rows(), wv.cols()));
  }
  if (bv.rows() != 1 || bv.cols() != wv.rows()) {
    throw DimensionError("linear: bias must be 1x" +
                         std::to_string(wv.rows()));
  }
  Tensor out = xv * wv.transpose();
  out.rowwise() += bv.row(0);
  const int ix = x.id(), iw = w.id(), ib = bias.id();
  return x.tape()->record(
      std::move(out), {x, w, bias}, [ix, iw, ib](Tape& t, int self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(ix)) t.accumulate(ix, g * t.value(iw));
        if (t.requires_grad(iw)) t.accumulate(iw, g.transpose() * t.value(ix));
        if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
      });
}

Var add(Var a, Var b) {
  require_same_shape("add", a.value(), b.value());
  Tensor out = a.value() + b.value();
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a.value(), b.value());
  Tensor out = a.value() - b.value();
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, -t.grad(self));
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a.value(), b.value());
  Tensor out = a.value().cwiseProduct(b.value());
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
    if (t.requires_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
  });
}

Var add_row(Var x, Var row) {
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != xv.cols()) {
    throw DimensionError("add_row: row must be 1x" +
                         std::to_string(xv.cols()) + ", got " +
                         shape_str(rv.rows(), rv.cols()));
  }
  Tensor out = xv;
  out.rowwise() += rv.row(0);
  const int ix = x.id(), ir = row.id();
  return x.tape()->record(std::move(out), {x, row}, [ix, ir](Tape& t, int self) {
    t.accumulate(ix, t.grad(self));
    if (t.requires_grad(ir)) t.accumulate(ir, t.grad(self).colwise().sum());
  });
}

Var scale(Var x, double s) {
  Tensor out = x.value() * s;
  const int ix = x.id();
  return x.tape()->record(std::move(out), {x}, [ix, s](Tape& t, int self) {
    t.accumulate(ix, t.grad(self) * s);
  });
}

Var relu(Var x) {
  Tensor out = x.value().cwiseMax(0.0);
  const int ix = x.id();
  return x.tape()->record(std::move(out), {x}, [ix](Tape& t, int self) {
    const Tensor& xv = t.value(ix);
    t.accumulate(ix,
                   (xv.array() > 0.0).select(t.grad(self).array(), 0.0).matrix());
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row count mismatch");
    }
    cols += p.cols();
  }
  Tensor out(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
    ids.push_back(p.id());
    widths.push_back(p.cols());
  }
  return parts[0].tape()->record(
      std::move(out), parts, [ids, widths](Tape& t, int self) {
        const Tensor& g = t.grad(self);
        Eigen::Index off = 0;
        for (std::size_t i = 0; i < ids.size(); ++i) {
          if (t.requires_grad(ids[i])) {
            t.accumulate(ids[i], g.middleCols(off, widths[i]));
          }
          off += widths[i];
        }
      });
}

Var slice_cols(Var x, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 1 || begin + count > x.cols()) {
    throw IndexError("slice_cols: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside width " +
                     std::to_string(x.cols()));
  }
  Tensor out = x.value().middleCols(begin, count);
  const int ix = x.id();
  return x.tape()->record(std::move(out), {x},
                          [ix, begin, count](Tape& t, int self) {
                            t.grad_buffer(ix).middleCols(begin, count) +=
                                t.grad(self);
                          });
}

Var slice_rows(Var x, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 1 || begin + count > x.rows()) {
    throw IndexError("slice_rows: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside height " +
                     std::to_string(x.rows()));
  }
  Tensor out = x.value().middleRows(begin, count);
  const int ix = x.id();
  return x.tape()->record(std::move(out), {x},
                          [ix, begin, count](Tape& t, int self) {
                            t.grad_buffer(ix).middleRows(begin, count) +=
                                t.grad(self);
                          });
}

Var sum(Var x) {
  Tensor out(1, 1);
  out(0, 0) = x.value().sum();
  const int ix = x.id();
  return x.tape()->record(std::move(out), {x}, [ix](Tape& t, int self) {
    const Tensor& xv = t.value(ix);
    t.accumulate(ix, Tensor::Constant(xv.rows(), xv.cols(), t.grad(self)(0, 0)));
  });
}

Var mean(Var x) {
  const double n = static_cast<double>(x.value().size());
  return scale(sum(x), 1.0 / n);
}

Var softmax_rows(Var x) {
  Tensor p = send::softmax_rows(x.value());
  const int ix = x.id();
  return x.tape()->record(Tensor(p), {x}, [ix](Tape& t, int self) {
    const Tensor& p = t.value(self);
    const Tensor& g = t.grad(self);
    Eigen::VectorXd dot = (g.cwiseProduct(p)).rowwise().sum();
    Tensor dx = g;
    dx.colwise() -= dot;
    t.accumulate(ix, dx.cwiseProduct(p));
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const Tensor& xv = x.value();
  const Eigen::Index d = xv.cols();
  if (gain.rows() != 1 || gain.cols() != d || bias.rows() != 1 ||
      bias.cols() != d) {
    throw DimensionError("layer_norm: gain/bias must be 1x" +
                         std::to_string(d));
  }
  Eigen::VectorXd mu = xv.rowwise().mean();
  Tensor xhat = xv;
  xhat.colwise() -= mu;
  Eigen::VectorXd inv_std =
      ((xhat.array().square().rowwise().sum() / static_cast<double>(d)) + eps)
          .rsqrt()
          .matrix();
  xhat.array().colwise() *= inv_std.array();
  Tensor out = xhat;
  out.array().rowwise() *= gain.value().row(0).array();
  out.rowwise() += bias.value().row(0);
  const int ix = x.id(), ig = gain.id(), ib = bias.id();
  return x.tape()->record(
      std::move(out), {x, gain, bias},
      [ix, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          Tape& t, int self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(ig)) {
          t.accumulate(ig, g.cwiseProduct(xhat).colwise().sum());
        }
        if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
        if (t.requires_grad(ix)) {
          Tensor dxhat = g;
          dxhat.array().rowwise() *= t.value(ig).row(0).array();
          Eigen::VectorXd m1 = dxhat.rowwise().mean();
          Eigen::VectorXd m2 = dxhat.cwiseProduct(xhat).rowwise().mean();
          Tensor dx = dxhat;
          dx.colwise() -= m1;
          dx -= (xhat.array().colwise() * m2.array()).matrix();
          dx.array().colwise() *= inv_std.array();
          t.accumulate(ix, dx);
        }
      });
}

Var cross_entropy(Var logits, std::span<const int> targets) {
  const Tensor& x = logits.value();
  if (static_cast<Eigen::Index>(targets.size()) != x.rows()) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(x.rows()) +
                         " frames");
  }
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] < 0 || targets[t] >= x.cols()) {
      throw IndexError("cross_entropy: target " + std::to_string(targets[t]) +
                       " at frame " + std::to_string(t) + " outside [0, " +
                       std::to_string(x.cols()) + ")");
    }
  }
  Tensor logp = log_softmax_rows(x);
  double total = 0.0;
  for (Eigen::Index t = 0; t < x.rows(); ++t) total -= logp(t, targets[t]);
  const double frames = static_cast<double>(x.rows());
  Tensor out(1, 1);
  out(0, 0) = total / frames;
  std::vector<int> tg(targets.begin(), targets.end());
  const int ix = logits.id();
  return logits.tape()->record(
      std::move(out), {logits},
      [ix, tg = std::move(tg), logp = std::move(logp), frames](Tape& t,
                                                              int self) {
        Tensor dx = logp.array().exp().matrix();
        for (std::size_t r = 0; r < tg.size(); ++r) {
          dx(static_cast<Eigen::Index>(r), tg[r]) -= 1.0;
        }
        t.accumulate(ix, dx * (t.grad(self)(0, 0) / frames));
      });
}

Var binary_cross_entropy(Var logits, const LabelMatrix& targets) {
  const Tensor& x = logits.value();
  if (x.rows() != targets.rows() || x.cols() != targets.cols()) {
    throw DimensionError("binary_cross_entropy: logits " +
                         shape_str(x.rows(), x.cols()) + " vs targets " +
                         shape_str(targets.rows(), targets.cols()));
  }
  Tensor y = targets.cast<double>();
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    total += softplus(x.data()[i]) - y.data()[i] * x.data()[i];
  }
  const double count = static_cast<double>(x.size());
  Tensor out(1, 1);
  out(0, 0) = total / count;
  const int ix = logits.id();
  return logits.tape()->record(
      std::move(out), {logits},
      [ix, y = std::move(y), count](Tape& t, int self) {
        Tensor dx = send::sigmoid(t.value(ix)) - y;
        t.accumulate(ix, dx * (t.grad(self)(0, 0) / count));
      });
}

}  // namespace send
