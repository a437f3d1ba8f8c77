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
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "send/rttmio.hpp"
#include "test_util.hpp"

namespace send {
namespace {

TEST(Parse, SpeakerLine) {
  const auto doc =
      parse_rttm_text("SPEAKER m1 1 0.500 1.250 <NA> <NA> spk2 <NA> <NA>\n");
  ASSERT_EQ(doc.recordings.size(), 1u);
  const SegmentList& s = doc.recordings[0];
  EXPECT_EQ(s.recording, "m1");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.segments[0].speaker, "spk2");
  EXPECT_EQ(s.segments[0].onset, 0.5);
  EXPECT_EQ(s.segments[0].duration, 1.25);
  EXPECT_NE(doc.find("m1"), nullptr);
  EXPECT_EQ(doc.find("m2"), nullptr);
}

TEST(Parse, EmptyCommentsAndOtherTypes) {
  EXPECT_TRUE(parse_rttm_text("").recordings.empty());
  const auto doc = parse_rttm_text(
      ";; header\n\n"
      "SPKR-INFO m1 1 <NA> <NA> <NA> unknown spk0 <NA> <NA>\n"
      "SPEAKER m1 1 0.000 0.100 <NA> <NA> spk0 <NA> <NA>\n"
      "SPEAKER m0 1 2.000 0.100 <NA> <NA> spk1 <NA> <NA>\n");
  EXPECT_EQ(doc.skipped, 1);
  ASSERT_EQ(doc.recordings.size(), 2u);
  EXPECT_EQ(doc.recordings[0].recording, "m0");
  EXPECT_EQ(doc.recordings[1].recording, "m1");
}

TEST(Parse, MalformedLinesReportLineNumber) {
  try {
    parse_rttm_text("SPEAKER m1 1 x 1.0 <NA> <NA> spk2 <NA> <NA>\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1);
  }
  try {
    parse_rttm_text(
        "SPEAKER m1 1 0.0 1.0 <NA> <NA> a <NA> <NA>\n\nSPEAKER m1 1 0.0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_rttm_text("SPEAKER m 1 -1 1 <NA> <NA> a <NA> <NA>\n"),
               ParseError);
  EXPECT_THROW(parse_rttm_text("SPEAKER m 1 0 0 <NA> <NA> a <NA> <NA>\n"),
               ParseError);
  EXPECT_THROW(parse_rttm_text("SPEAKER m 1 nan 1 <NA> <NA> a <NA> <NA>\n"),
               ParseError);
}

TEST(Write, Format) {
  SegmentList s{"rec", 100.0, {{"spk0", 0.5004, 1.0}}};
  EXPECT_EQ(write_rttm(s),
            "SPEAKER rec 1 0.500 1.000 <NA> <NA> spk0 <NA> <NA>\n");
  EXPECT_EQ(write_rttm(SegmentList{}), "");
}

TEST(Write, RoundTripWithinOneMillisecond) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> onset(0.0, 60.0), dur(0.01, 5.0);
  for (int c = 0; c < 100; ++c) {
    SegmentList s;
    s.recording = "r" + std::to_string(c);
    const int n = testing::uniform_int(rng, 0, 12);
    for (int i = 0; i < n; ++i) {
      s.segments.push_back({"spk" + std::to_string(testing::uniform_int(rng, 0, 3)),
                            onset(rng), dur(rng)});
    }
    s.normalize();
    const auto doc = parse_rttm_text(write_rttm(s));
    if (n == 0) {
      EXPECT_TRUE(doc.recordings.empty());
      continue;
    }
    ASSERT_EQ(doc.recordings.size(), 1u);
    const SegmentList& b = doc.recordings[0];
    ASSERT_EQ(b.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(b.segments[i].speaker, s.segments[i].speaker);
      EXPECT_LE(std::abs(b.segments[i].onset - s.segments[i].onset), 5e-4 + 1e-12);
      EXPECT_LE(std::abs(b.segments[i].duration - s.segments[i].duration),
                5e-4 + 1e-12);
    }
  }
}

TEST(Parse, OrderInsensitive) {
  std::vector<std::string> lines{
      "SPEAKER a 1 3.000 1.000 <NA> <NA> s1 <NA> <NA>",
      "SPEAKER a 1 0.000 2.000 <NA> <NA> s0 <NA> <NA>",
      "SPEAKER b 1 1.000 1.000 <NA> <NA> s0 <NA> <NA>",
      "SPEAKER a 1 0.500 0.250 <NA> <NA> s1 <NA> <NA>",
  };
  auto join = [](const std::vector<std::string>& v) {
    std::string out;
    for (const auto& l : v) out += l + "\n";
    return out;
  };
  const std::string want = [&] {
    std::string out;
    for (const auto& r : parse_rttm_text(join(lines)).recordings) out += write_rttm(r);
    return out;
  }();
  std::mt19937_64 rng(2);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string got;
    for (const auto& r : parse_rttm_text(join(lines)).recordings) got += write_rttm(r);
    EXPECT_EQ(got, want);
  }
}

TEST(Frames, Examples) {
  const std::vector<std::string> names{"spk0", "spk1"};
  SegmentList s{"r", 100.0, {{"spk1", 0.0, 0.10}}};
  LabelMatrix m = frames_from_segments(s, 100.0, 20, names);
  EXPECT_EQ(m.col(1).head(10).cast<int>().sum(), 10);
  EXPECT_EQ(m.col(1).tail(10).cast<int>().sum(), 0);
  EXPECT_EQ(m.col(0).cast<int>().sum(), 0);

  EXPECT_EQ(frames_from_segments(SegmentList{}, 100.0, 5, names),
            LabelMatrix::Zero(5, 2));

  SegmentList past{"r", 100.0, {{"spk0", 0.15, 10.0}}};
  m = frames_from_segments(past, 100.0, 20, names);
  EXPECT_EQ(m.col(0).cast<int>().sum(), 5);

  SegmentList unknown{"r", 100.0, {{"spk7", 0.0, 1.0}}};
  EXPECT_THROW(frames_from_segments(unknown, 100.0, 20, names), InputError);
}

TEST(Frames, CeilWithMillisecondSlack) {
  EXPECT_EQ(frame_ceil(0.0, 100.0), 0);
  EXPECT_EQ(frame_ceil(0.10, 100.0), 10);
  EXPECT_EQ(frame_ceil(0.101, 100.0), 11);
  EXPECT_EQ(frame_ceil(0.7, 100.0), 70);
  EXPECT_EQ(frame_ceil(1.0 / 3.0, 3.0), 1);
}

}  // namespace
}  // namespace send
