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

#ifndef SEND_RTTMIO_HPP_
#define SEND_RTTMIO_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "send/postproc.hpp"
#include "send/tensor.hpp"

namespace send {

struct RttmRecord {
  std::string recording;
  std::string channel = "1";
  double onset = 0.0;
  double duration = 0.0;
  std::string speaker;
};

struct RttmDocument {
  std::vector<SegmentList> recordings;  // sorted by recording id
  int skipped = 0;                      // non-SPEAKER records

  const SegmentList* find(const std::string& recording) const;
};

/// Parses SPEAKER lines; blank lines and ";;" comments are ignored, other
/// record types are counted in `skipped`. Throws ParseError with the
/// 1-based line number on malformed input.
RttmDocument parse_rttm(std::istream& in, double frame_rate = 100.0);
RttmDocument parse_rttm_text(const std::string& text,
                             double frame_rate = 100.0);
RttmDocument read_rttm_file(const std::string& path,
                            double frame_rate = 100.0);

/// One SPEAKER line per segment, times with three decimals.
std::string write_rttm(const SegmentList& segments);
void write_rttm(std::ostream& out, const SegmentList& segments);

/// Frame t is active for a speaker iff t / frame_rate lies in
/// [onset, onset + duration). Frames outside [0, frames) are clipped.
LabelMatrix frames_from_segments(const SegmentList& segments,
                                 double frame_rate, Eigen::Index frames,
                                 const std::vector<std::string>& speakers);

/// First frame index at or after `seconds`.
Eigen::Index frame_ceil(double seconds, double frame_rate);

}  // namespace send

#endif  // SEND_RTTMIO_HPP_
