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

#ifndef SEND_METRICS_HPP_
#define SEND_METRICS_HPP_

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "send/postproc.hpp"
#include "send/tensor.hpp"

namespace send {

/// Speaker-frame error counts.
struct DerReport {
  long total = 0;
  long missed = 0;
  long false_alarm = 0;
  long confusion = 0;

  double der() const {
    return static_cast<double>(missed + false_alarm + confusion) /
           static_cast<double>(std::max(total, 1L));
  }
  DerReport& operator+=(const DerReport& o);
  bool operator==(const DerReport&) const = default;

  /// "total\tmiss\tfa\tconf\tder"
  std::string tsv() const;
  static std::string tsv_header();
  std::string text() const;
};

enum class SpeakerMapping { kIdentity, kOptimal };

/// `mapping[n]` is the hyp column scored against ref column n.
std::vector<int> optimal_mapping(const LabelMatrix& ref,
                                 const LabelMatrix& hyp);

DerReport der_frames(const LabelMatrix& ref, const LabelMatrix& hyp,
                     SpeakerMapping mapping = SpeakerMapping::kIdentity);

/// Scores only frames with scored[t] != 0; hyp columns are read through
/// `mapping` when it is non-empty.
DerReport der_frames_masked(const LabelMatrix& ref, const LabelMatrix& hyp,
                            std::span<const std::uint8_t> scored,
                            std::span<const int> mapping = {});

/// Rasterizes both lists at `frame_rate` over the union of their speakers
/// and scores frames farther than `collar` seconds from every reference
/// boundary.
DerReport der_segments(const SegmentList& ref, const SegmentList& hyp,
                       double frame_rate, double collar = 0.0);

struct SweepPoint {
  double threshold = 0.0;
  DerReport report;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double best3_mean = 0.0;  // mean DER of the three best thresholds
};

/// Thresholds {0, step, 2 step, ..., 1}.
std::vector<double> threshold_grid(double step);

/// binarize -> median filter -> der_frames at each grid threshold.
SweepResult threshold_sweep(const Tensor& probabilities, const LabelMatrix& ref,
                            double step,
                            int median_window = kDefaultMedianWindow);

/// Pools counts over several recordings before ranking thresholds.
SweepResult threshold_sweep(std::span<const Tensor> probabilities,
                            std::span<const LabelMatrix> refs, double step,
                            int median_window = kDefaultMedianWindow);

}  // namespace send

#endif  // SEND_METRICS_HPP_
