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
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "send/metrics.hpp"
#include "send/postproc.hpp"
#include "send/rttmio.hpp"
#include "test_util.hpp"

namespace send {
namespace {

using testing::random_labels;
using testing::uniform_int;

// Per-frame error counts straight from the set definitions.
DerReport der_oracle(const LabelMatrix& ref, const LabelMatrix& hyp,
                     const std::vector<int>& map) {
  DerReport r;
  for (Eigen::Index t = 0; t < ref.rows(); ++t) {
    long nr = 0, nh = 0, both = 0;
    for (Eigen::Index s = 0; s < ref.cols(); ++s) {
      const bool a = ref(t, s) != 0;
      const bool b = hyp(t, map[static_cast<std::size_t>(s)]) != 0;
      nr += a;
      nh += b;
      both += a && b;
    }
    r.total += nr;
    r.missed += std::max(nr - nh, 0L);
    r.false_alarm += std::max(nh - nr, 0L);
    r.confusion += std::min(nr, nh) - both;
  }
  return r;
}

std::vector<int> identity(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Recursive enumeration in lexicographic order, scoring full DER.
void search(const LabelMatrix& ref, const LabelMatrix& hyp,
            std::vector<int>& cur, std::vector<bool>& used,
            std::vector<int>& best, double& best_der) {
  const int n = static_cast<int>(ref.cols());
  if (static_cast<int>(cur.size()) == n) {
    const double d = der_oracle(ref, hyp, cur).der();
    if (d < best_der) {
      best_der = d;
      best = cur;
    }
    return;
  }
  for (int m = 0; m < n; ++m) {
    if (used[static_cast<std::size_t>(m)]) continue;
    used[static_cast<std::size_t>(m)] = true;
    cur.push_back(m);
    search(ref, hyp, cur, used, best, best_der);
    cur.pop_back();
    used[static_cast<std::size_t>(m)] = false;
  }
}

std::vector<int> mapping_oracle(const LabelMatrix& ref, const LabelMatrix& hyp) {
  std::vector<int> cur, best;
  std::vector<bool> used(static_cast<std::size_t>(ref.cols()), false);
  double best_der = 1e300;
  search(ref, hyp, cur, used, best, best_der);
  return best;
}

LabelMatrix runs(Eigen::Index frames, int speakers,
                 std::initializer_list<std::tuple<int, int, int>> spans) {
  LabelMatrix m = LabelMatrix::Zero(frames, speakers);
  for (auto [s, a, b] : spans) m.block(a, s, b - a + 1, 1).setOnes();
  return m;
}

TEST(DerFrames, Examples) {
  const LabelMatrix ref = runs(15, 2, {{0, 0, 9}, {1, 5, 14}});
  const LabelMatrix hyp = runs(15, 2, {{0, 0, 9}, {1, 0, 14}});
  const DerReport r = der_frames(ref, hyp);
  EXPECT_EQ(r.total, 20);
  EXPECT_EQ(r.false_alarm, 5);
  EXPECT_EQ(r.missed, 0);
  EXPECT_EQ(r.confusion, 0);
  EXPECT_EQ(r.der(), 0.25);

  EXPECT_EQ(der_frames(ref, ref).der(), 0.0);
  const DerReport silent = der_frames(ref, LabelMatrix::Zero(15, 2));
  EXPECT_EQ(silent.der(), 1.0);
  EXPECT_EQ(silent.missed, 20);
  EXPECT_THROW(der_frames(ref, LabelMatrix::Zero(14, 2)), DimensionError);
}

TEST(DerFrames, MatchesSetOracle) {
  std::mt19937_64 rng(1);
  for (int c = 0; c < 200; ++c) {
    const int n = uniform_int(rng, 1, 6);
    const int t = uniform_int(rng, 1, 60);
    const LabelMatrix ref = random_labels(rng, t, n, 0.4);
    const LabelMatrix hyp = random_labels(rng, t, n, 0.4);
    const DerReport got = der_frames(ref, hyp);
    EXPECT_EQ(got, der_oracle(ref, hyp, identity(n)));
    if (got.total > 0) EXPECT_EQ(got.der() == 0.0, ref == hyp);
  }
}

TEST(DerFrames, InvariantUnderJointPermutation) {
  std::mt19937_64 rng(2);
  for (int c = 0; c < 50; ++c) {
    const int n = uniform_int(rng, 2, 5);
    const LabelMatrix ref = random_labels(rng, 40, n, 0.4);
    const LabelMatrix hyp = random_labels(rng, 40, n, 0.4);
    auto perm = identity(n);
    std::shuffle(perm.begin(), perm.end(), rng);
    LabelMatrix pr(40, n), ph(40, n);
    for (int s = 0; s < n; ++s) {
      pr.col(s) = ref.col(perm[s]);
      ph.col(s) = hyp.col(perm[s]);
    }
    EXPECT_EQ(der_frames(pr, ph), der_frames(ref, hyp));
  }
}

TEST(DerFrames, RemovingHypothesisNeverLowersMiss) {
  std::mt19937_64 rng(3);
  const LabelMatrix ref = random_labels(rng, 80, 4, 0.4);
  LabelMatrix hyp = random_labels(rng, 80, 4, 0.5);
  long missed = der_frames(ref, hyp).missed;
  for (Eigen::Index i = 0; i < hyp.size(); ++i) {
    if (!hyp.data()[i]) continue;
    hyp.data()[i] = 0;
    const long now = der_frames(ref, hyp).missed;
    EXPECT_GE(now, missed);
    missed = now;
  }
}

TEST(DerSegments, EqualsFramesOnRasterizedCases) {
  std::mt19937_64 rng(4);
  for (int c = 0; c < 100; ++c) {
    const int n = uniform_int(rng, 1, 6);
    const int t = uniform_int(rng, 1, 200);
    const LabelMatrix ref = random_labels(rng, t, n, 0.3);
    const LabelMatrix hyp = random_labels(rng, t, n, 0.3);
    const auto names = default_speaker_names(n);
    const auto rs = segments_from_binary(ref, 100.0, "r", names);
    const auto hs = segments_from_binary(hyp, 100.0, "r", names);
    EXPECT_EQ(der_segments(rs, hs, 100.0), der_frames(ref, hyp)) << "case " << c;
  }
}

TEST(DerSegments, Examples) {
  SegmentList ref{"m", 100.0, {{"spk1", 0.0, 0.10}, {"spk2", 0.05, 0.10}}};
  SegmentList hyp{"m", 100.0, {{"spk1", 0.0, 0.10}, {"spk2", 0.0, 0.15}}};
  EXPECT_EQ(der_segments(ref, hyp, 100.0).der(), 0.25);
  EXPECT_EQ(der_segments(ref, ref, 100.0).der(), 0.0);

  const DerReport all = der_segments(ref, hyp, 100.0, 10.0);
  EXPECT_EQ(all.total, 0);
  EXPECT_EQ(all.der(), 0.0);

  SegmentList other = hyp;
  other.recording = "n";
  EXPECT_THROW(der_segments(ref, other, 100.0), InputError);
}

TEST(DerSegments, CollarExcludesNearBoundaryFrames) {
  SegmentList ref{"m", 100.0, {{"a", 1.0, 1.0}}};
  SegmentList hyp{"m", 100.0, {{"a", 1.05, 0.95}}};
  EXPECT_EQ(der_segments(ref, hyp, 100.0).missed, 5);
  const DerReport r = der_segments(ref, hyp, 100.0, 0.1);
  // Frames 91..109 and 191..209 are unscored; 81 reference frames remain.
  EXPECT_EQ(r.total, 81);
  EXPECT_EQ(r.der(), 0.0);
}

TEST(Mapping, Examples) {
  std::mt19937_64 rng(5);
  const LabelMatrix ref = random_labels(rng, 50, 3, 0.4);
  EXPECT_EQ(optimal_mapping(ref, ref), identity(3));
  LabelMatrix swapped = ref;
  swapped.col(0) = ref.col(2);
  swapped.col(2) = ref.col(0);
  const auto m = optimal_mapping(ref, swapped);
  EXPECT_EQ(m, (std::vector<int>{2, 1, 0}));
  EXPECT_EQ(der_frames(ref, swapped, SpeakerMapping::kOptimal).der(), 0.0);
  EXPECT_THROW(optimal_mapping(LabelMatrix::Zero(4, 9), LabelMatrix::Zero(4, 9)),
               DomainError);
}

TEST(Mapping, MatchesIndependentSearch) {
  std::mt19937_64 rng(6);
  for (int c = 0; c < 50; ++c) {
    const int n = c < 40 ? 3 : uniform_int(rng, 1, 5);
    const LabelMatrix ref = random_labels(rng, 30, n, 0.4);
    const LabelMatrix hyp = random_labels(rng, 30, n, 0.4);
    const auto want = mapping_oracle(ref, hyp);
    EXPECT_EQ(optimal_mapping(ref, hyp), want) << "case " << c;
    EXPECT_EQ(der_frames(ref, hyp, SpeakerMapping::kOptimal),
              der_oracle(ref, hyp, want));
  }
}

TEST(Sweep, OracleProbabilitiesScoreZero) {
  std::mt19937_64 rng(7);
  const LabelMatrix ref = random_labels(rng, 100, 3, 0.4);
  const Tensor p = ref.cast<double>();
  const SweepResult r = threshold_sweep(p, ref, 0.1, 1);
  ASSERT_EQ(r.points.size(), 11u);
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    EXPECT_EQ(r.points[i].report.der(), 0.0) << r.points[i].threshold;
  }
  EXPECT_GT(r.points[0].report.der(), 0.0);
  EXPECT_EQ(r.best3_mean, 0.0);
  EXPECT_NEAR(r.points[3].threshold, 0.3, 1e-12);
  EXPECT_EQ(threshold_grid(0.25).size(), 5u);
  EXPECT_THROW(threshold_grid(0.0), DomainError);
}

TEST(Sweep, BestThreeMeanAndPooling) {
  std::mt19937_64 rng(8);
  const LabelMatrix ref = random_labels(rng, 120, 2, 0.5);
  Tensor p(120, 2);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double u = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
    p.data()[i] = ref.data()[i] ? 1.0 - u : u;
  }
  const SweepResult r = threshold_sweep(p, ref, 0.1, 1);
  std::vector<double> ders;
  for (const auto& pt : r.points) ders.push_back(pt.report.der());
  std::sort(ders.begin(), ders.end());
  EXPECT_NEAR(r.best3_mean, (ders[0] + ders[1] + ders[2]) / 3.0, 1e-15);

  const std::vector<Tensor> ps{p, p};
  const std::vector<LabelMatrix> rs{ref, ref};
  const SweepResult pooled = threshold_sweep(ps, rs, 0.1, 1);
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    DerReport twice = r.points[i].report;
    twice += r.points[i].report;
    EXPECT_EQ(pooled.points[i].report, twice);
  }
}

TEST(Report, Serialization) {
  DerReport r{20, 1, 5, 0};
  EXPECT_EQ(DerReport::tsv_header(), "total\tmiss\tfa\tconf\tder");
  EXPECT_EQ(r.tsv(), "20\t1\t5\t0\t0.300000");
  EXPECT_NE(r.text().find("30.00%"), std::string::npos);
  EXPECT_EQ(DerReport{}.der(), 0.0);
}

}  // namespace
}  // namespace send
