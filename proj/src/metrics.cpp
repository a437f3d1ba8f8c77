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

#include "send/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "send/rttmio.hpp"

namespace send {

namespace {

constexpr int kMaxMappingSpeakers = 8;

void check_same_shape(const LabelMatrix& ref, const LabelMatrix& hyp,
                      const char* who) {
  if (ref.rows() != hyp.rows() || ref.cols() != hyp.cols()) {
    throw DimensionError(std::string(who) + ": ref is " +
                         shape_str(ref.rows(), ref.cols()) + ", hyp is " +
                         shape_str(hyp.rows(), hyp.cols()));
  }
}

}  // namespace

DerReport& DerReport::operator+=(const DerReport& o) {
  total += o.total;
  missed += o.missed;
  false_alarm += o.false_alarm;
  confusion += o.confusion;
  return *this;
}

std::string DerReport::tsv_header() { return "total\tmiss\tfa\tconf\tder"; }

std::string DerReport::tsv() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%ld\t%ld\t%ld\t%ld\t%.6f", total, missed,
                false_alarm, confusion, der());
  return buf;
}

std::string DerReport::text() const {
  const double denom = static_cast<double>(std::max(total, 1L));
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "scored speaker frames: %ld\n"
                "missed speech:         %ld (%.2f%%)\n"
                "false alarm:           %ld (%.2f%%)\n"
                "speaker confusion:     %ld (%.2f%%)\n"
                "DER:                   %.2f%%\n",
                total, missed, 100.0 * missed / denom, false_alarm,
                100.0 * false_alarm / denom, confusion,
                100.0 * confusion / denom, 100.0 * der());
  return buf;
}

std::vector<int> optimal_mapping(const LabelMatrix& ref,
                                 const LabelMatrix& hyp) {
  check_same_shape(ref, hyp, "optimal_mapping");
  const int n = static_cast<int>(ref.cols());
  if (n > kMaxMappingSpeakers) {
    throw DomainError("optimal_mapping: " + std::to_string(n) +
                      " speakers exceeds the brute-force limit of 8");
  }
  // Only sum_t |R_t & H_t| depends on the permutation, and it splits into
  // per-pair overlaps.
  const Matrix<long> overlap =
      (ref.cast<long>().transpose() * hyp.cast<long>()).eval();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  long best_score = -1;
  do {
    long score = 0;
    for (int i = 0; i < n; ++i) score += overlap(i, perm[i]);
    if (score > best_score) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

DerReport der_frames_masked(const LabelMatrix& ref, const LabelMatrix& hyp,
                            std::span<const std::uint8_t> scored,
                            std::span<const int> mapping) {
  check_same_shape(ref, hyp, "der_frames");
  if (!scored.empty() && static_cast<Eigen::Index>(scored.size()) != ref.rows()) {
    throw DimensionError("der_frames: scoring mask length " +
                         std::to_string(scored.size()) + " != " +
                         std::to_string(ref.rows()) + " frames");
  }
  if (!mapping.empty() &&
      static_cast<Eigen::Index>(mapping.size()) != ref.cols()) {
    throw DimensionError("der_frames: mapping size does not match speakers");
  }
  DerReport r;
  for (Eigen::Index t = 0; t < ref.rows(); ++t) {
    if (!scored.empty() && !scored[static_cast<std::size_t>(t)]) continue;
    long nr = 0, nh = 0, both = 0;
    for (Eigen::Index n = 0; n < ref.cols(); ++n) {
      const bool rv = ref(t, n) != 0;
      const bool hv =
          hyp(t, mapping.empty() ? n : mapping[static_cast<std::size_t>(n)]) !=
          0;
      nr += rv;
      nh += hv;
      both += rv && hv;
    }
    r.total += nr;
    r.missed += std::max(nr - nh, 0L);
    r.false_alarm += std::max(nh - nr, 0L);
    r.confusion += std::min(nr, nh) - both;
  }
  return r;
}

DerReport der_frames(const LabelMatrix& ref, const LabelMatrix& hyp,
                     SpeakerMapping mapping) {
  check_same_shape(ref, hyp, "der_frames");
  if (mapping == SpeakerMapping::kOptimal) {
    const std::vector<int> m = optimal_mapping(ref, hyp);
    return der_frames_masked(ref, hyp, {}, m);
  }
  return der_frames_masked(ref, hyp, {}, {});
}

DerReport der_segments(const SegmentList& ref, const SegmentList& hyp,
                       double frame_rate, double collar) {
  if (!ref.recording.empty() && !hyp.recording.empty() &&
      ref.recording != hyp.recording) {
    throw InputError("der_segments: recording ids differ ('" + ref.recording +
                     "' vs '" + hyp.recording + "')");
  }
  if (!(frame_rate > 0.0)) {
    throw DomainError("der_segments: frame rate must be positive");
  }
  if (collar < 0.0) throw DomainError("der_segments: negative collar");
  std::set<std::string> names;
  Eigen::Index frames = 0;
  for (const SegmentList* list : {&ref, &hyp}) {
    for (const Segment& s : list->segments) {
      names.insert(s.speaker);
      frames = std::max(frames, frame_ceil(s.onset + s.duration, frame_rate));
    }
  }
  const std::vector<std::string> speakers(names.begin(), names.end());
  const LabelMatrix r = frames_from_segments(ref, frame_rate, frames, speakers);
  const LabelMatrix h = frames_from_segments(hyp, frame_rate, frames, speakers);
  std::vector<std::uint8_t> scored(static_cast<std::size_t>(frames), 1);
  if (collar > 0.0) {
    const double reach = collar * frame_rate;
    for (const Segment& s : ref.segments) {
      for (double b : {s.onset, s.onset + s.duration}) {
        const double centre = b * frame_rate;
        const Eigen::Index lo = std::max<Eigen::Index>(
            0, static_cast<Eigen::Index>(std::floor(centre - reach)));
        const Eigen::Index hi = std::min<Eigen::Index>(
            frames - 1, static_cast<Eigen::Index>(std::ceil(centre + reach)));
        for (Eigen::Index t = lo; t <= hi; ++t) {
          if (std::abs(static_cast<double>(t) - centre) < reach) {
            scored[static_cast<std::size_t>(t)] = 0;
          }
        }
      }
    }
  }
  return der_frames_masked(r, h, scored, {});
}

std::vector<double> threshold_grid(double step) {
  if (!(step > 0.0 && step < 1.0)) {
    throw DomainError("threshold grid step must lie in (0, 1)");
  }
  std::vector<double> grid;
  for (long i = 0;; ++i) {
    const double thr = static_cast<double>(i) * step;
    if (thr > 1.0 + 1e-9) break;
    grid.push_back(std::min(thr, 1.0));
  }
  if (grid.back() < 1.0 - 1e-9) grid.push_back(1.0);
  return grid;
}

SweepResult threshold_sweep(std::span<const Tensor> probabilities,
                            std::span<const LabelMatrix> refs, double step,
                            int median_window) {
  if (probabilities.size() != refs.size()) {
    throw DimensionError("threshold_sweep: probability/reference count differ");
  }
  SweepResult out;
  for (double thr : threshold_grid(step)) {
    SweepPoint p;
    p.threshold = thr;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const LabelMatrix hyp = median_filter_columns(
          binarize(probabilities[i], thr), median_window);
      p.report += der_frames(refs[i], hyp);
    }
    out.points.push_back(p);
  }
  std::vector<double> ders;
  for (const SweepPoint& p : out.points) ders.push_back(p.report.der());
  std::sort(ders.begin(), ders.end());
  const std::size_t k = std::min<std::size_t>(3, ders.size());
  out.best3_mean = std::accumulate(ders.begin(), ders.begin() + k, 0.0) /
                   static_cast<double>(k);
  return out;
}

SweepResult threshold_sweep(const Tensor& probabilities, const LabelMatrix& ref,
                            double step, int median_window) {
  return threshold_sweep(std::span<const Tensor>(&probabilities, 1),
                         std::span<const LabelMatrix>(&ref, 1), step,
                         median_window);
}

}  // namespace send
