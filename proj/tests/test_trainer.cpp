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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "send/checkpoint.hpp"
#include "send/trainer.hpp"
#include "test_util.hpp"

namespace send {
namespace {

namespace fs = std::filesystem;

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(root)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[e.path().filename().string()] = s.str();
  }
  return out;
}

// A small corpus shared by the tests in this file.
class TrainerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(testing::scratch_dir("trainer_data"));
    CorpusConfig c;
    c.speakers = 2;
    c.max_overlap = 2;
    c.feat_dim = 6;
    c.chunk_frames = 60;
    c.train_chunks = 12;
    c.eval_chunks = 4;
    c.test_chunks = 4;
    c.on_prob = 0.05;
    c.off_prob = 0.08;
    c.min_run = 5;
    c.overlap_lo = 0.0;
    c.overlap_hi = 1.0;
    c.max_cosine = 0.5;
    make_corpus(c, 9, *root_);

    wide_ = new fs::path(testing::scratch_dir("trainer_wide"));
    CorpusConfig w;
    w.chunk_frames = 120;
    w.train_chunks = 4;
    w.eval_chunks = 8;
    w.test_chunks = 2;
    w.overlap_lo = 0.0;
    w.overlap_hi = 1.0;
    make_corpus(w, 10, *wide_);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    fs::remove_all(*wide_);
    delete root_;
    delete wide_;
  }

  static ModelConfig tiny() { return ModelConfig::preset("tiny"); }

  static TrainConfig quick() {
    TrainConfig t;
    t.steps = 6;
    t.batch = 3;
    t.lr_base = 0.05;
    t.warmup = 3;
    t.eval_every = 2;
    t.keep_best = 2;
    t.seed = 4;
    return t;
  }

  static fs::path* root_;
  static fs::path* wide_;
};

fs::path* TrainerTest::root_ = nullptr;
fs::path* TrainerTest::wide_ = nullptr;

TEST(LrSchedule, Examples) {
  TrainConfig c;
  c.lr_base = 1.0;
  c.warmup = 10000;
  EXPECT_NEAR(lr_schedule(10000, c), 0.01, 1e-15);
  EXPECT_NEAR(lr_schedule(1, c), 1e-6, 1e-20);
  EXPECT_NEAR(lr_schedule(40000, c), 0.005, 1e-15);
  EXPECT_THROW(lr_schedule(0, c), DomainError);

  c.schedule = ScheduleKind::kConstant;
  c.lr_const = 1e-5;
  for (long s : {1L, 7L, 100000L}) EXPECT_EQ(lr_schedule(s, c), 1e-5);
}

TEST(LrSchedule, ContinuousAtKnee) {
  TrainConfig c;
  // The relative step across the knee is about 1 / (2 warmup).
  for (long w : {5000L, 10000L, 123457L}) {
    c.warmup = w;
    const double at = lr_schedule(w, c);
    EXPECT_LT(std::abs(at - lr_schedule(w + 1, c)), at * 2e-4) << w;
  }
  for (long w : {10L, 500L, 10000L}) {
    c.warmup = w;
    const double at = lr_schedule(w, c);
    EXPECT_LT(lr_schedule(w - 1, c), at);
    EXPECT_LT(lr_schedule(w + 1, c), at);
    EXPECT_LT(std::abs(at - lr_schedule(w + 1, c)), at / (2.0 * w));
  }
}

TEST(Config, KeysAndStages) {
  KeyValues kv;
  kv.set("stage", "finetune");
  kv.set("steps", "10");
  TrainConfig c = TrainConfig::from(kv);
  EXPECT_EQ(c.schedule, ScheduleKind::kConstant);
  EXPECT_EQ(c.steps, 10);
  const TrainConfig back = TrainConfig::from(c.to_key_values());
  EXPECT_EQ(back.to_key_values().entries(), c.to_key_values().entries());

  KeyValues bad;
  bad.set("stepz", "1");
  EXPECT_THROW(TrainConfig::from(bad), ConfigError);
  c.keep_best = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Average, Examples) {
  std::mt19937_64 rng(1);
  ParamStore a;
  a.add("x", testing::random_tensor(rng, 3, 4));
  a.add("y", testing::random_tensor(rng, 1, 2));
  EXPECT_EQ(average_params({a}).at("x"), a.at("x"));

  ParamStore neg = a;
  for (std::size_t i = 0; i < neg.size(); ++i) neg.value(i) *= -1.0;
  const ParamStore zero = average_params({a, neg});
  EXPECT_EQ(zero.at("x"), Tensor::Zero(3, 4));
  EXPECT_EQ(zero.at("y"), Tensor::Zero(1, 2));

  ParamStore b = a, c = a;
  b.value(0) = testing::random_tensor(rng, 3, 4, 1e3);
  c.value(0) = testing::random_tensor(rng, 3, 4, 1e-3);
  const Tensor abc = average_params({a, b, c}).at("x");
  EXPECT_EQ(average_params({c, a, b}).at("x"), abc);
  EXPECT_EQ(average_params({b, c, a}).at("x"), abc);
  EXPECT_EQ(average_params({c, b, a}).at("x"), abc);

  ParamStore other;
  other.add("x", Tensor::Zero(3, 4));
  EXPECT_THROW(average_params({a, other}), CheckpointError);
  EXPECT_THROW(average_params({}), CheckpointError);
}

TEST(Average, CheckpointFiles) {
  const auto dir = testing::scratch_dir("avg_files");
  std::mt19937_64 rng(2);
  ParamStore a, b;
  a.add("w", testing::random_tensor(rng, 2, 2));
  b.add("w", testing::random_tensor(rng, 2, 2));
  save_checkpoint(dir / "a.ckpt", a);
  save_checkpoint(dir / "b.ckpt", b);
  const ParamStore avg = average_checkpoints({dir / "a.ckpt", dir / "b.ckpt"});
  EXPECT_LE((avg.at("w") - 0.5 * (a.at("w") + b.at("w"))).cwiseAbs().maxCoeff(),
            1e-15);
  ParamStore c;
  c.add("v", Tensor::Zero(2, 2));
  save_checkpoint(dir / "c.ckpt", c);
  EXPECT_THROW(average_checkpoints({dir / "a.ckpt", dir / "c.ckpt"}),
               CheckpointError);
  fs::remove_all(dir);
}

TEST(Smoothing, ExponentialAverage) {
  std::vector<TrainLogEntry> s{{1, 0, 4.0, 0}, {2, 0, 2.0, 0}, {3, 0, 0.0, 0}};
  const auto out = smooth_losses(s, 0.5);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0], 4.0);
  EXPECT_EQ(out[1], 3.0);
  EXPECT_EQ(out[2], 1.5);
}

TEST(Logs, TrainLogRoundTrip) {
  TrainLog log;
  log.steps = {{1, 1e-6, 2.5, 0.25}, {2, 2e-6, 1.0 / 3.0, 7.0}};
  std::stringstream ss;
  write_train_log(ss, log);
  const auto back = read_train_log(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].step, 2);
  EXPECT_NEAR(back[1].loss, 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(back[0].lr, 1e-6, 1e-15);
}

TEST_F(TrainerTest, ExamplesCarryKeepLowestClasses) {
  const DataSplit split = load_split(*root_, "train", 3);
  ModelConfig m = tiny();
  m.max_overlap = 1;
  const auto ex = make_examples(split, m);
  ASSERT_EQ(ex.size(), 3u);
  EXPECT_EQ(ex[0].name, "train/chunk_0");
  const PseCodec codec(2, 1);
  for (const auto& e : ex) {
    ASSERT_EQ(static_cast<Eigen::Index>(e.classes.size()), e.labels.rows());
    for (Eigen::Index t = 0; t < e.labels.rows(); ++t) {
      EXPECT_EQ(e.classes[static_cast<std::size_t>(t)],
                codec.encode_mask(keep_lowest_bits(row_mask(e.labels, t), 1)));
    }
  }
}

TEST_F(TrainerTest, UntrainedLossNearLnC) {
  const ModelConfig m = ModelConfig::preset("small");
  const auto ex = make_examples(load_split(*wide_, "eval"), m);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const EvalResult r =
        evaluate(m, init_params(m, seed), ex, LossKind::kCePse, DecodeOptions{});
    EXPECT_NEAR(r.loss, std::log(16.0), 0.2) << seed;
    EXPECT_GE(r.loss, 0.0);
  }
}

TEST_F(TrainerTest, OracleLogitsScoreZero) {
  const ModelConfig m = ModelConfig::preset("small");
  const DataSplit split = load_split(*wide_, "eval");
  const auto ex = make_examples(split, m);
  const PseCodec codec(m.speakers, m.max_overlap);
  DerReport pse, ml;
  for (const auto& e : ex) {
    Tensor logits = Tensor::Zero(e.labels.rows(), codec.num_classes());
    Tensor probs = Tensor::Constant(e.labels.rows(), m.speakers, -8.0);
    for (Eigen::Index t = 0; t < e.labels.rows(); ++t) {
      logits(t, e.classes[static_cast<std::size_t>(t)]) = 10.0;
      for (int s = 0; s < m.speakers; ++s) {
        if (e.labels(t, s)) probs(t, s) = 8.0;
      }
    }
    pse += der_frames(e.labels, decode_logits(m, logits, DecodeOptions{}).labels);
    ModelConfig mm = m;
    mm.head = HeadKind::kMultilabel;
    ml += der_frames(e.labels, decode_logits(mm, probs, DecodeOptions{}).labels);
  }
  EXPECT_GT(pse.total, 0);
  EXPECT_EQ(pse.der(), 0.0);
  EXPECT_EQ(ml.der(), 0.0);
}

TEST_F(TrainerTest, SameSeedSameBytes) {
  const auto a = testing::scratch_dir("train_a");
  const auto b = testing::scratch_dir("train_b");
  const TrainResult ra = train(tiny(), *root_, quick(), a);
  train(tiny(), *root_, quick(), b);
  const auto ta = tree(a);
  EXPECT_EQ(ta, tree(b));
  EXPECT_TRUE(ta.count("model.cfg") && ta.count("train.cfg") &&
              ta.count("train.log") && ta.count("eval.log") &&
              ta.count("last.ckpt") && ta.count("avg.ckpt"));
  EXPECT_EQ(ra.best.size(), 2u);
  EXPECT_EQ(ra.log.steps.size(), 6u);
  // Evaluations at 0, 2, 4 and 6.
  EXPECT_EQ(ra.log.evals.size(), 4u);
  for (std::size_t i = 1; i < ra.log.steps.size(); ++i) {
    EXPECT_GT(ra.log.steps[i].step, ra.log.steps[i - 1].step);
    EXPECT_GE(ra.log.steps[i].loss, 0.0);
  }
  // The averaged store is the mean of the retained checkpoints.
  const ParamStore avg = average_checkpoints(ra.best);
  const ParamStore saved = load_checkpoint(ra.averaged);
  for (std::size_t i = 0; i < avg.size(); ++i) {
    EXPECT_EQ(avg.value(i), saved.value(i));
  }

  TrainConfig other = quick();
  other.seed = 5;
  const auto c = testing::scratch_dir("train_c");
  train(tiny(), *root_, other, c);
  EXPECT_NE(tree(c).at("last.ckpt"), ta.at("last.ckpt"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST_F(TrainerTest, WorkerCountDoesNotChangeResults) {
  const auto a = testing::scratch_dir("train_w1");
  const auto b = testing::scratch_dir("train_w3");
  ::setenv("SEND_THREADS", "1", 1);
  train(tiny(), *root_, quick(), a);
  ::setenv("SEND_THREADS", "3", 1);
  train(tiny(), *root_, quick(), b);
  ::unsetenv("SEND_THREADS");
  EXPECT_EQ(tree(a), tree(b));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_F(TrainerTest, LossFallsOnTinyRun) {
  TrainConfig t = quick();
  t.steps = 60;
  t.eval_every = 60;
  t.lr_base = 0.2;
  t.warmup = 10;
  const auto dir = testing::scratch_dir("train_fall");
  const TrainResult r = train(tiny(), *root_, t, dir);
  EXPECT_LT(r.log.evals.back().loss, r.log.evals.front().loss);
  fs::remove_all(dir);
}

TEST_F(TrainerTest, FinetuneStartsFromCheckpoint) {
  const auto pre = testing::scratch_dir("train_pre");
  const TrainResult r = train(tiny(), *root_, quick(), pre);
  TrainConfig ft = quick();
  ft.stage = TrainStage::kFinetune;
  ft.schedule = ScheduleKind::kConstant;
  ft.lr_const = 1e-5;
  ft.init = r.averaged.string();
  ft.steps = 2;
  const auto dir = testing::scratch_dir("train_ft");
  const TrainResult f = train(tiny(), *root_, ft, dir);
  EXPECT_EQ(f.log.steps.front().lr, 1e-5);
  // Step-0 evaluation of the fine-tune run scores the initial checkpoint.
  const auto ex = make_examples(load_split(*root_, "eval"), tiny());
  const EvalResult e0 =
      evaluate(tiny(), load_checkpoint(r.averaged), ex, LossKind::kCePse,
               DecodeOptions{3, 0, 100.0, "rec", {}});
  EXPECT_NEAR(f.log.evals.front().loss, e0.loss, 1e-12);
  fs::remove_all(pre);
  fs::remove_all(dir);
}

TEST_F(TrainerTest, MismatchesAreConfigErrors) {
  const auto dir = testing::scratch_dir("train_bad");
  ModelConfig m = tiny();
  m.speakers = 3;
  m.max_overlap = 3;
  EXPECT_THROW(train(m, *root_, quick(), dir), ConfigError);
  m = tiny();
  m.feat_dim = 7;
  EXPECT_THROW(train(m, *root_, quick(), dir), ConfigError);
  m = tiny();
  m.max_overlap = 1;
  EXPECT_THROW(train(m, *root_, quick(), dir), ConfigError);
  TrainConfig t = quick();
  t.loss = LossKind::kBceMultilabel;
  EXPECT_THROW(train(tiny(), *root_, t, dir), ConfigError);
  fs::remove_all(dir);
}

TEST_F(TrainerTest, DivergenceIsReported) {
  TrainConfig t = quick();
  t.schedule = ScheduleKind::kConstant;
  t.lr_const = 1e300;
  t.clip = 0.0;
  const auto dir = testing::scratch_dir("train_nan");
  try {
    train(tiny(), *root_, t, dir);
    FAIL() << "expected TrainError";
  } catch (const TrainError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("step"), std::string::npos) << what;
    EXPECT_NE(what.find("chunk_"), std::string::npos) << what;
  }
  fs::remove_all(dir);
}

}  // namespace
}  // namespace send
