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

#include "send/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace send {

void SegmentList::normalize() {
  std::sort(segments.begin(), segments.end(),
            [](const Segment& a, const Segment& b) {
              return std::tie(a.onset, a.speaker, a.duration) <
                     std::tie(b.onset, b.speaker, b.duration);
            });
}

int scaled_median_window(double frame_rate) {
  if (!(frame_rate > 0.0)) {
    throw DomainError("median window: frame rate must be positive");
  }
  const double w = kDefaultMedianWindow * frame_rate / kDefaultMedianRate;
  const long half = std::lround((w - 1.0) / 2.0);
  return static_cast<int>(2 * std::max(half, 0L) + 1);
}

std::vector<int> argmax_decode(const Tensor& logits) {
  if (logits.cols() < 1) throw DimensionError("argmax_decode: no classes");
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(t, c) > logits(t, best)) best = c;
    }
    out[static_cast<std::size_t>(t)] = static_cast<int>(best);
  }
  return out;
}

LabelMatrix binarize(const Tensor& probabilities, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw DomainError("binarize: threshold must lie in [0, 1]");
  }
  return (probabilities.array() >= threshold).cast<std::uint8_t>().matrix();
}

std::vector<std::uint8_t> median_filter_binary(
    const std::vector<std::uint8_t>& stream, int window) {
  if (window < 1 || window % 2 == 0) {
    throw DomainError("median filter window must be odd and >= 1, got " +
                      std::to_string(window));
  }
  const long n = static_cast<long>(stream.size());
  if (n == 0 || window == 1) return stream;
  const long half = window / 2;
  auto at = [&](long i) -> int {
    return stream[static_cast<std::size_t>(std::clamp(i, 0L, n - 1))] ? 1 : 0;
  };
  std::vector<std::uint8_t> out(stream.size());
  long ones = 0;
  for (long k = -half; k <= half; ++k) ones += at(k);
  for (long t = 0; t < n; ++t) {
    out[static_cast<std::size_t>(t)] = ones > half ? 1 : 0;
    ones += at(t + half + 1) - at(t - half);
  }
  return out;
}

LabelMatrix median_filter_columns(const LabelMatrix& labels, int window) {
  LabelMatrix out(labels.rows(), labels.cols());
  std::vector<std::uint8_t> col(static_cast<std::size_t>(labels.rows()));
  for (Eigen::Index n = 0; n < labels.cols(); ++n) {
    for (Eigen::Index t = 0; t < labels.rows(); ++t) {
      col[static_cast<std::size_t>(t)] = labels(t, n);
    }
    const auto smoothed = median_filter_binary(col, window);
    for (Eigen::Index t = 0; t < labels.rows(); ++t) {
      out(t, n) = smoothed[static_cast<std::size_t>(t)];
    }
  }
  return out;
}

LabelMatrix drop_short_runs(const LabelMatrix& labels, int min_frames) {
  LabelMatrix out = labels;
  if (min_frames <= 1) return out;
  const Eigen::Index frames = labels.rows();
  for (Eigen::Index n = 0; n < labels.cols(); ++n) {
    Eigen::Index t = 0;
    while (t < frames) {
      if (!labels(t, n)) {
        ++t;
        continue;
      }
      Eigen::Index end = t;
      while (end < frames && labels(end, n)) ++end;
      if (end - t < min_frames) {
        for (Eigen::Index i = t; i < end; ++i) out(i, n) = 0;
      }
      t = end;
    }
  }
  return out;
}

std::vector<std::string> default_speaker_names(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("spk" + std::to_string(i));
  return names;
}

SegmentList segments_from_binary(const LabelMatrix& labels, double frame_rate,
                                 const std::string& recording,
                                 const std::vector<std::string>& speakers) {
  if (!(frame_rate > 0.0)) {
    throw DomainError("segments_from_binary: frame rate must be positive");
  }
  const std::vector<std::string> names =
      speakers.empty() ? default_speaker_names(static_cast<int>(labels.cols()))
                       : speakers;
  if (static_cast<Eigen::Index>(names.size()) != labels.cols()) {
    throw DimensionError("segments_from_binary: " +
                         std::to_string(names.size()) + " names for " +
                         std::to_string(labels.cols()) + " columns");
  }
  SegmentList out;
  out.recording = recording;
  out.frame_rate = frame_rate;
  const Eigen::Index frames = labels.rows();
  for (Eigen::Index n = 0; n < labels.cols(); ++n) {
    Eigen::Index t = 0;
    while (t < frames) {
      if (!labels(t, n)) {
        ++t;
        continue;
      }
      Eigen::Index end = t;
      while (end < frames && labels(end, n)) ++end;
      out.segments.push_back({names[static_cast<std::size_t>(n)],
                              static_cast<double>(t) / frame_rate,
                              static_cast<double>(end - t) / frame_rate});
      t = end;
    }
  }
  out.normalize();
  return out;
}

namespace {

Decoded finish(const LabelMatrix& raw, const DecodeOptions& options) {
  Decoded out;
  out.labels = drop_short_runs(
      median_filter_columns(raw, options.median_window), options.min_duration);
  out.segments = segments_from_binary(out.labels, options.frame_rate,
                                      options.recording, options.speakers);
  return out;
}

}  // namespace

Decoded decode_pipeline(const Tensor& logits, const PseCodec& codec,
                        const DecodeOptions& options) {
  if (logits.cols() != codec.num_classes()) {
    throw DimensionError("decode_pipeline: logits have " +
                         std::to_string(logits.cols()) + " columns, codec has " +
                         std::to_string(codec.num_classes()) + " classes");
  }
  return finish(codec.decode_sequence(argmax_decode(logits)), options);
}

Decoded decode_multilabel(const Tensor& probabilities, double threshold,
                          const DecodeOptions& options) {
  return finish(binarize(probabilities, threshold), options);
}

}  // namespace send
