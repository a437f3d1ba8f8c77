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

#include "send/rttmio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace send {

namespace {

// Slack, in frames, for times that were rounded to milliseconds.
constexpr double kFrameSlack = 1e-6;

double parse_time(const std::string& token, long line, const char* what) {
  double v = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError("rttm line " + std::to_string(line) + ": bad " + what +
                         " '" + token + "'",
                     line);
  }
  return v;
}

}  // namespace

const SegmentList* RttmDocument::find(const std::string& recording) const {
  for (const SegmentList& s : recordings) {
    if (s.recording == recording) return &s;
  }
  return nullptr;
}

RttmDocument parse_rttm(std::istream& in, double frame_rate) {
  std::map<std::string, SegmentList> grouped;
  RttmDocument doc;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty() || tok[0].starts_with(";;")) continue;
    if (tok[0] != "SPEAKER") {
      ++doc.skipped;
      continue;
    }
    if (tok.size() < 8) {
      throw ParseError("rttm line " + std::to_string(lineno) +
                           ": expected at least 8 fields, got " +
                           std::to_string(tok.size()),
                       lineno);
    }
    const double onset = parse_time(tok[3], lineno, "onset");
    const double duration = parse_time(tok[4], lineno, "duration");
    if (onset < 0.0 || duration <= 0.0) {
      throw ParseError("rttm line " + std::to_string(lineno) +
                           ": need onset >= 0 and duration > 0",
                       lineno);
    }
    SegmentList& list = grouped[tok[1]];
    list.recording = tok[1];
    list.frame_rate = frame_rate;
    list.segments.push_back({tok[7], onset, duration});
  }
  for (auto& [id, list] : grouped) {
    list.normalize();
    doc.recordings.push_back(std::move(list));
  }
  return doc;
}

RttmDocument parse_rttm_text(const std::string& text, double frame_rate) {
  std::istringstream in(text);
  return parse_rttm(in, frame_rate);
}

RttmDocument read_rttm_file(const std::string& path, double frame_rate) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open rttm file '" + path + "'");
  return parse_rttm(in, frame_rate);
}

void write_rttm(std::ostream& out, const SegmentList& segments) {
  char buf[64];
  for (const Segment& s : segments.segments) {
    std::snprintf(buf, sizeof buf, " %.3f %.3f ", s.onset, s.duration);
    out << "SPEAKER " << segments.recording << " 1" << buf << "<NA> <NA> "
        << s.speaker << " <NA> <NA>\n";
  }
}

std::string write_rttm(const SegmentList& segments) {
  std::ostringstream out;
  write_rttm(out, segments);
  return out.str();
}

Eigen::Index frame_ceil(double seconds, double frame_rate) {
  return static_cast<Eigen::Index>(
      std::ceil(seconds * frame_rate - kFrameSlack));
}

LabelMatrix frames_from_segments(const SegmentList& segments,
                                 double frame_rate, Eigen::Index frames,
                                 const std::vector<std::string>& speakers) {
  if (!(frame_rate > 0.0)) {
    throw DomainError("frames_from_segments: frame rate must be positive");
  }
  LabelMatrix out = LabelMatrix::Zero(frames, static_cast<Eigen::Index>(speakers.size()));
  for (const Segment& s : segments.segments) {
    const auto it = std::find(speakers.begin(), speakers.end(), s.speaker);
    if (it == speakers.end()) {
      throw InputError("frames_from_segments: unknown speaker '" + s.speaker +
                       "'");
    }
    const Eigen::Index col = it - speakers.begin();
    const Eigen::Index begin =
        std::clamp<Eigen::Index>(frame_ceil(s.onset, frame_rate), 0, frames);
    const Eigen::Index end = std::clamp<Eigen::Index>(
        frame_ceil(s.onset + s.duration, frame_rate), 0, frames);
    for (Eigen::Index t = begin; t < end; ++t) out(t, col) = 1;
  }
  return out;
}

}  // namespace send
