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

#ifndef SEND_POSTPROC_HPP_
#define SEND_POSTPROC_HPP_

#include <string>
#include <vector>

#include "send/pse.hpp"
#include "send/tensor.hpp"

namespace send {

struct Segment {
  std::string speaker;
  double onset = 0.0;     // seconds
  double duration = 0.0;  // seconds
};

/// Segments of one recording, sorted by (onset, speaker).
struct SegmentList {
  std::string recording;
  double frame_rate = 100.0;
  std::vector<Segment> segments;

  bool empty() const { return segments.empty(); }
  std::size_t size() const { return segments.size(); }
  /// Sorts by onset, then speaker, then duration.
  void normalize();
};

inline constexpr int kDefaultMedianWindow = 83;
inline constexpr double kDefaultMedianRate = 100.0;

/// Median window for `frame_rate`, scaled from 83 frames at 100 fps and
/// rounded to the nearest odd integer >= 1.
int scaled_median_window(double frame_rate);

/// Per-frame argmax; ties go to the lowest class id.
std::vector<int> argmax_decode(const Tensor& logits);

/// 1 where p >= threshold.
LabelMatrix binarize(const Tensor& probabilities, double threshold);

/// Sliding majority over an odd window with replicate edge padding.
std::vector<std::uint8_t> median_filter_binary(
    const std::vector<std::uint8_t>& stream, int window);

/// Column-wise median_filter_binary.
LabelMatrix median_filter_columns(const LabelMatrix& labels, int window);

/// Clears active runs shorter than `min_frames` in every column.
LabelMatrix drop_short_runs(const LabelMatrix& labels, int min_frames);

/// Speaker names "spk0".."spk<n-1>".
std::vector<std::string> default_speaker_names(int n);

/// Contiguous active runs become segments. `speakers` names the columns;
/// empty means default_speaker_names.
SegmentList segments_from_binary(const LabelMatrix& labels, double frame_rate,
                                 const std::string& recording,
                                 const std::vector<std::string>& speakers = {});

struct DecodeOptions {
  int median_window = kDefaultMedianWindow;
  int min_duration = 0;  // frames; <= 1 disables
  double frame_rate = kDefaultMedianRate;
  std::string recording = "rec";
  std::vector<std::string> speakers;
};

struct Decoded {
  LabelMatrix labels;
  SegmentList segments;
};

/// argmax -> PSE decode -> per-speaker median -> short-run removal ->
/// segments.
Decoded decode_pipeline(const Tensor& logits, const PseCodec& codec,
                        const DecodeOptions& options = {});

/// Multi-label counterpart: sigmoid probabilities are thresholded, then
/// smoothed exactly like the PSE path.
Decoded decode_multilabel(const Tensor& probabilities, double threshold,
                          const DecodeOptions& options = {});

}  // namespace send

#endif  // SEND_POSTPROC_HPP_
