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

#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "send/postproc.hpp"
#include "send/pse.hpp"
#include "send/rttmio.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace send {
namespace {

using testing::uniform_int;

using testing::Stream;
using testing::median_oracle;

TEST(Argmax, Examples) {
  Tensor onehot = Tensor::Zero(3, 6);
  onehot(0, 4) = 1;
  onehot(1, 0) = 1;
  onehot(2, 5) = 1;
  EXPECT_EQ(argmax_decode(onehot), (std::vector<int>{4, 0, 5}));

  Tensor tie = Tensor::Zero(1, 7);
  tie(0, 2) = 3.0;
  tie(0, 5) = 3.0;
  EXPECT_EQ(argmax_decode(tie), std::vector<int>{2});
}

TEST(Argmax, MatchesScan) {
  std::mt19937_64 rng(1);
  const Tensor x = testing::random_tensor(rng, 200, 11);
  const auto got = argmax_decode(x);
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    int best = 0;
    for (Eigen::Index c = 1; c < x.cols(); ++c) {
      if (x(t, c) > x(t, best)) best = static_cast<int>(c);
    }
    EXPECT_EQ(got[static_cast<std::size_t>(t)], best);
  }
}

TEST(Binarize, Examples) {
  Tensor p(1, 2);
  p << 0.4, 0.6;
  LabelMatrix want(1, 2);
  want << 0, 1;
  EXPECT_EQ(binarize(p, 0.5), want);
  std::mt19937_64 rng(2);
  const Tensor u = testing::random_tensor(rng, 5, 3).cwiseAbs().cwiseMin(0.99);
  EXPECT_EQ(binarize(u, 0.0), LabelMatrix::Ones(5, 3));
  EXPECT_EQ(binarize(u, 1.0), LabelMatrix::Zero(5, 3));
  EXPECT_THROW(binarize(u, 1.5), DomainError);
}

TEST(Median, Examples) {
  const Stream x{0, 1, 1, 0, 1, 1, 1, 0};
  EXPECT_EQ(median_filter_binary(x, 1), x);
  EXPECT_EQ(median_filter_binary(x, 3), (Stream{0, 1, 1, 1, 1, 1, 1, 0}));
  for (int w : {1, 3, 83, 101}) {
    EXPECT_EQ(median_filter_binary(Stream(40, 1), w), Stream(40, 1));
    EXPECT_EQ(median_filter_binary(Stream(40, 0), w), Stream(40, 0));
  }
  EXPECT_THROW(median_filter_binary(x, 4), DomainError);
  EXPECT_THROW(median_filter_binary(x, 0), DomainError);
  EXPECT_TRUE(median_filter_binary({}, 5).empty());
}

TEST(Median, MatchesSortedWindowOracle) {
  std::mt19937_64 rng(3);
  for (int c = 0; c < 1000; ++c) {
    const int n = uniform_int(rng, 1, 80);
    const int window = 2 * uniform_int(rng, 0, 30) + 1;
    const double p = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    std::bernoulli_distribution b(p);
    Stream x(static_cast<std::size_t>(n));
    for (auto& v : x) v = b(rng);
    ASSERT_EQ(median_filter_binary(x, window), median_oracle(x, window))
        << "case " << c << " n " << n << " window " << window;
  }
}

TEST(Median, ScaledWindow) {
  EXPECT_EQ(scaled_median_window(100.0), 83);
  EXPECT_EQ(scaled_median_window(50.0), 41);
  EXPECT_EQ(scaled_median_window(1.0), 1);
  EXPECT_EQ(scaled_median_window(200.0) % 2, 1);
}

TEST(ShortRuns, DroppedBelowMinimum) {
  LabelMatrix m(10, 1);
  m << 1, 1, 0, 1, 1, 1, 0, 1, 0, 0;
  LabelMatrix want(10, 1);
  want << 0, 0, 0, 1, 1, 1, 0, 0, 0, 0;
  EXPECT_EQ(drop_short_runs(m, 3), want);
  EXPECT_EQ(drop_short_runs(m, 1), m);
  EXPECT_EQ(drop_short_runs(m, 0), m);
}

TEST(Pipeline, SilenceGivesNoSegments) {
  const PseCodec codec(4, 4);
  Tensor logits = Tensor::Zero(50, 16);
  logits.col(0).setConstant(5.0);
  const Decoded d = decode_pipeline(logits, codec);
  EXPECT_TRUE(d.segments.empty());
  EXPECT_EQ(d.labels, LabelMatrix::Zero(50, 4));
}

TEST(Pipeline, SingleSpeakerRunBecomesSegment) {
  const PseCodec codec(4, 4);
  Tensor logits = Tensor::Zero(300, 16);
  logits.col(0).setConstant(1.0);
  logits.block(100, codec.encode_mask(1u << 2), 100, 1).setConstant(9.0);
  DecodeOptions opt;
  opt.recording = "m1";
  const Decoded d = decode_pipeline(logits, codec, opt);
  ASSERT_EQ(d.segments.size(), 1u);
  EXPECT_EQ(d.segments.recording, "m1");
  EXPECT_EQ(d.segments.segments[0].speaker, "spk2");
  EXPECT_NEAR(d.segments.segments[0].onset, 1.0, 1e-12);
  EXPECT_NEAR(d.segments.segments[0].duration, 1.0, 1e-12);
}

TEST(Pipeline, BlipRemovedByMedian) {
  const PseCodec codec(2, 2);
  Tensor logits = Tensor::Zero(200, 4);
  logits.col(0).setConstant(1.0);
  logits(120, codec.encode_mask(0b11)) = 9.0;
  EXPECT_TRUE(decode_pipeline(logits, codec).segments.empty());
  DecodeOptions raw;
  raw.median_window = 1;
  EXPECT_EQ(decode_pipeline(logits, codec, raw).segments.size(), 2u);
}

TEST(Pipeline, MultilabelMatchesPseOnSameActivity) {
  std::mt19937_64 rng(4);
  const PseCodec codec(3, 3);
  const LabelMatrix truth = testing::random_labels(rng, 120, 3, 0.3);
  Tensor logits = Tensor::Zero(120, 8);
  Tensor probs(120, 3);
  for (Eigen::Index t = 0; t < 120; ++t) {
    logits(t, codec.encode_mask(row_mask(truth, t))) = 1.0;
    for (int s = 0; s < 3; ++s) probs(t, s) = truth(t, s) ? 0.9 : 0.1;
  }
  DecodeOptions opt;
  opt.median_window = 5;
  EXPECT_EQ(decode_pipeline(logits, codec, opt).labels,
            decode_multilabel(probs, 0.5, opt).labels);
}

TEST(Segments, RoundTripThroughFrames) {
  std::mt19937_64 rng(5);
  for (int c = 0; c < 100; ++c) {
    const int n = uniform_int(rng, 1, 5);
    const int frames = uniform_int(rng, 1, 300);
    const double rate = c % 2 ? 100.0 : 8.0;
    LabelMatrix m = testing::random_labels(rng, frames, n, 0.4);
    m = median_filter_columns(m, 3);
    const auto names = default_speaker_names(n);
    const SegmentList segs = segments_from_binary(m, rate, "r", names);
    for (const auto& s : segs.segments) EXPECT_GT(s.duration, 0.0);
    EXPECT_EQ(frames_from_segments(segs, rate, frames, names), m) << "case " << c;
    // Through RTTM text as well, at 100 fps the times are exact to 1 ms.
    if (rate == 100.0) {
      const auto doc = parse_rttm_text(write_rttm(segs));
      const SegmentList back = doc.recordings.empty() ? SegmentList{} : doc.recordings[0];
      EXPECT_EQ(frames_from_segments(back, rate, frames, names), m);
    }
  }
}

}  // namespace
}  // namespace send
