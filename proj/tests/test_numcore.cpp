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

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "send/autograd.hpp"
#include "send/checkpoint.hpp"
#include "send/gradcheck.hpp"
#include "send/optim.hpp"
#include "send/params.hpp"
#include "test_util.hpp"

namespace send {
namespace {

using testing::random_tensor;

Tensor mat(std::initializer_list<std::initializer_list<double>> rows) {
  Tensor t(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) t(r, c++) = v;
    ++r;
  }
  return t;
}

TEST(Matmul, IdentityAndHandProduct) {
  std::mt19937_64 rng(3);
  Tape tape;
  const Tensor x = random_tensor(rng, 3, 4);
  Var y = matmul(tape.constant(Tensor::Identity(3, 3)), tape.constant(x));
  EXPECT_EQ(y.value(), x);

  Var p = matmul(tape.constant(mat({{1, 2}, {3, 4}})),
                 tape.constant(mat({{1}, {1}})));
  EXPECT_EQ(p.value(), mat({{3}, {7}}));
}

TEST(Matmul, ShapeMismatchThrows) {
  Tape tape;
  EXPECT_THROW(matmul(tape.constant(Tensor::Zero(2, 3)),
                      tape.constant(Tensor::Zero(2, 2))),
               DimensionError);
}

TEST(SoftmaxRows, Examples) {
  const Tensor z = softmax_rows(Tensor::Zero(1, 4));
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(z(0, i), 0.25);

  const Tensor big = softmax_rows(mat({{1000.0, 0.0}}));
  EXPECT_TRUE(big.allFinite());
  EXPECT_NEAR(big(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(big(0, 1), 0.0, 1e-15);

  const Tensor r = softmax_rows(mat({{std::log(1.0), std::log(3.0)}}));
  EXPECT_NEAR(r(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(r(0, 1), 0.75, 1e-15);
}

TEST(SoftmaxRows, RowsSumToOneAndShiftInvariant) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor x = random_tensor(rng, 5, 7, 10.0);
    const Tensor p = softmax_rows(x);
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-12);
    }
    Tensor shifted = x;
    shifted.row(2).array() += 123.25;
    EXPECT_LT((softmax_rows(shifted) - p).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CrossEntropy, Examples) {
  Tape tape;
  const std::vector<int> targets = {0, 5, 15, 7};
  Var u = cross_entropy(tape.constant(Tensor::Zero(4, 16)), targets);
  EXPECT_NEAR(u.value()(0, 0), std::log(16.0), 1e-15);

  Tensor sat = Tensor::Zero(2, 3);
  sat(0, 1) = 30.0;
  sat(1, 2) = 30.0;
  const std::vector<int> hot = {1, 2};
  EXPECT_LT(cross_entropy(tape.constant(sat), hot).value()(0, 0), 1e-9);

  const std::vector<int> zero = {0};
  Var h = cross_entropy(tape.constant(mat({{0.0, std::log(3.0)}})), zero);
  EXPECT_NEAR(h.value()(0, 0), std::log(4.0), 1e-15);
}

TEST(CrossEntropy, OutOfRangeTargetThrows) {
  Tape tape;
  const std::vector<int> bad = {0, 4};
  EXPECT_THROW(cross_entropy(tape.constant(Tensor::Zero(2, 4)), bad),
               IndexError);
  const std::vector<int> neg = {-1, 0};
  EXPECT_THROW(cross_entropy(tape.constant(Tensor::Zero(2, 4)), neg),
               IndexError);
}

TEST(CrossEntropy, NonNegative) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Tape tape;
    std::vector<int> t(6);
    for (int& v : t) v = testing::uniform_int(rng, 0, 4);
    EXPECT_GE(cross_entropy(tape.constant(random_tensor(rng, 6, 5, 5.0)), t)
                  .value()(0, 0),
              0.0);
  }
}

TEST(BinaryCrossEntropy, Examples) {
  Tape tape;
  const LabelMatrix y = (LabelMatrix(2, 2) << 1, 0, 0, 1).finished();
  EXPECT_NEAR(binary_cross_entropy(tape.constant(Tensor::Zero(2, 2)), y)
                  .value()(0, 0),
              std::log(2.0), 1e-15);

  const Tensor sat = (Tensor(2, 2) << 30, -30, -30, 30).finished();
  EXPECT_LT(binary_cross_entropy(tape.constant(sat), y).value()(0, 0), 1e-9);

  const LabelMatrix one = LabelMatrix::Ones(1, 1);
  EXPECT_NEAR(binary_cross_entropy(tape.constant(mat({{std::log(3.0)}})), one)
                  .value()(0, 0),
              std::log(4.0 / 3.0), 1e-15);
}

TEST(BinaryCrossEntropy, ShapeMismatchThrows) {
  Tape tape;
  EXPECT_THROW(binary_cross_entropy(tape.constant(Tensor::Zero(2, 3)),
                                    LabelMatrix::Zero(3, 2)),
               DimensionError);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  ParamStore p;
  p.add("w", mat({{1.0, -2.0}}));
  ParamStore g = p.zeros_like();
  AdamState s;
  adam_step(p, g, s, 0.1);
  EXPECT_EQ(p.at("w"), mat({{1.0, -2.0}}));
  EXPECT_EQ(s.step, 1);
}

TEST(Adam, FirstStepMovesBySignTimesLr) {
  ParamStore p;
  p.add("w", mat({{1.0, -2.0, 0.5}}));
  ParamStore g;
  g.add("w", mat({{3.0, -0.25, 1e-3}}));
  AdamState s;
  adam_step(p, g, s, 0.01);
  const Tensor delta = p.at("w") - mat({{1.0, -2.0, 0.5}});
  EXPECT_NEAR(delta(0, 0), -0.01, 1e-6);
  EXPECT_NEAR(delta(0, 1), 0.01, 1e-6);
  EXPECT_NEAR(delta(0, 2), -0.01, 1e-6);
}

TEST(Adam, NonFiniteGradientThrowsAndLeavesStateUntouched) {
  ParamStore p;
  p.add("a", mat({{1.0}}));
  p.add("b", mat({{2.0}}));
  ParamStore g;
  g.add("a", mat({{1.0}}));
  g.add("b", mat({{std::nan("")}}));
  AdamState s;
  try {
    adam_step(p, g, s, 0.1);
    FAIL() << "expected UpdateError";
  } catch (const UpdateError& e) {
    EXPECT_EQ(e.param(), "b");
  }
  EXPECT_EQ(p.at("a")(0, 0), 1.0);
  EXPECT_EQ(s.step, 0);
}

TEST(Adam, Deterministic) {
  std::mt19937_64 rng(9);
  ParamStore p;
  p.add("w", random_tensor(rng, 4, 3));
  ParamStore q = p;
  AdamState s1, s2;
  for (int i = 0; i < 5; ++i) {
    ParamStore g;
    g.add("w", random_tensor(rng, 4, 3));
    adam_step(p, g, s1, 0.01);
    adam_step(q, g, s2, 0.01);
  }
  EXPECT_EQ(p.at("w"), q.at("w"));
}

TEST(ClipGradNorm, ScalesToMaxNorm) {
  ParamStore g;
  g.add("a", mat({{3.0}}));
  g.add("b", mat({{4.0}}));
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 1.0), 5.0);
  EXPECT_NEAR(global_norm(g), 1.0, 1e-15);
  ParamStore h = g;
  clip_grad_norm(h, 0.0);
  EXPECT_EQ(h.at("a"), g.at("a"));
}

TEST(GradCheck, Examples) {
  std::mt19937_64 rng(1);
  ParamStore point;
  point.add("x", random_tensor(rng, 3, 4));
  const GradCheckResult lin = grad_check(
      [](Tape&, std::span<const Var> v) { return sum(v[0]); }, point, 1e-5);
  EXPECT_LT(lin.max_rel_error, 1e-10);

  ParamStore zero;
  zero.add("x", Tensor::Zero(1, 1));
  const GradCheckResult sq = grad_check(
      [](Tape&, std::span<const Var> v) { return sum(mul(v[0], v[0])); }, zero,
      1e-5);
  EXPECT_EQ(sq.max_rel_error, 0.0);
  EXPECT_EQ(sq.analytic, 0.0);
  EXPECT_EQ(sq.numeric, 0.0);
}

TEST(GradCheck, ErrorsOnBadInput) {
  ParamStore point;
  point.add("x", Tensor::Ones(1, 1));
  auto f = [](Tape& t, std::span<const Var> v) {
    return sum(mul(v[0], t.constant(Tensor::Constant(1, 1, std::nan("")))));
  };
  EXPECT_THROW(grad_check(f, point, 1e-5), CheckError);
  EXPECT_THROW(grad_check([](Tape&, std::span<const Var> v) { return sum(v[0]); },
                          point, 0.0),
               CheckError);
}

// Every differentiable op against central differences.
TEST(GradCheck, AllOpsOnRandomInputs) {
  std::mt19937_64 rng(2024);
  ParamStore p;
  p.add("a", random_tensor(rng, 4, 3));
  p.add("b", random_tensor(rng, 3, 5));
  p.add("c", random_tensor(rng, 4, 5));
  p.add("w", random_tensor(rng, 6, 5));
  p.add("bias", random_tensor(rng, 1, 6));
  p.add("g", random_tensor(rng, 1, 6));
  p.add("r", random_tensor(rng, 1, 5));
  const std::vector<int> targets = {1, 0, 4, 3};
  const LabelMatrix bin = testing::random_labels(rng, 4, 6);

  auto f = [&](Tape& t, std::span<const Var> v) {
    Var ab = matmul(v[0], v[1]);                       // 4x5
    Var x = add(mul(ab, v[2]), scale(v[2], 0.5));      // 4x5
    x = sub(add_row(x, v[6]), scale(ab, 0.1));
    Var h = linear(x, v[3], v[4]);                     // 4x6
    Var hn = layer_norm(h, v[5], v[4]);
    Var s = softmax_rows(hn);
    Var parts[] = {slice_cols(hn, 1, 3), relu(slice_cols(h, 0, 3))};
    Var cat = concat_cols(parts);                      // 4x6
    Var nt = matmul_nt(slice_cols(cat, 0, 5), slice_rows(v[3], 1, 5));
    Var loss = add(cross_entropy(nt, targets), binary_cross_entropy(h, bin));
    loss = add(loss, mean(mul(s, s)));
    return add(loss, scale(sum(linear(x, v[3])), 0.01));
  };
  const GradCheckResult r = grad_check(f, p, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_param << "[" << r.worst_index
                                   << "]";
  EXPECT_EQ(r.checked, p.numel());
}

TEST(Tape, BackwardVisitsSharedNodesOnce) {
  Tape tape;
  Var x = tape.leaf(mat({{2.0}}));
  Var y = mul(x, x);
  Var z = add(y, y);
  tape.backward(z);
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 8.0);
}

TEST(Tape, NonScalarRootThrows) {
  Tape tape;
  Var x = tape.leaf(Tensor::Ones(2, 2));
  EXPECT_THROW(tape.backward(x), DimensionError);
}

TEST(Checkpoint, BitExactRoundTrip) {
  std::mt19937_64 rng(4);
  ParamStore p;
  p.add("speech_enc.layer0.past", random_tensor(rng, 2, 3));
  p.add("head.w", random_tensor(rng, 16, 5));
  Tensor odd(1, 3);
  odd << -0.0, 1e-308, 5e-324;
  p.add("odd", odd);
  const std::string bytes = encode_checkpoint(p);
  EXPECT_EQ(bytes.rfind("SENDCKPT1\n", 0), 0u);
  const ParamStore q = decode_checkpoint(bytes);
  ASSERT_TRUE(q.same_layout(p));
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(std::memcmp(p.value(i).data(), q.value(i).data(),
                          sizeof(double) * p.value(i).size()),
              0);
  }
  EXPECT_EQ(encode_checkpoint(q), bytes);
}

TEST(Checkpoint, RejectsCorruptInput) {
  ParamStore p;
  p.add("w", Tensor::Ones(2, 2));
  const std::string bytes = encode_checkpoint(p);
  EXPECT_THROW(decode_checkpoint("NOTCKPT\n"), CheckpointError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)),
               CheckpointError);
}

}  // namespace
}  // namespace send
