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

#ifndef SEND_PSE_HPP_
#define SEND_PSE_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "send/tensor.hpp"

namespace send {

inline constexpr int kMaxSpeakers = 16;

/// Number of speaker subsets of size <= k among n speakers.
int num_classes(int n, int k);

enum class OverflowPolicy {
  kStrict,      // frames with more than K active speakers are an error
  kKeepLowest,  // keep the K active speakers with the lowest indices
};

/// Power-set label codec.
///
/// Speaker n (0-based) contributes bit n to a frame mask, so a mask is the
/// integer sum of y_n * 2^n. Valid masks (popcount <= K) are numbered in
/// ascending mask order; class 0 is the empty set. With K == N the class id
/// equals the mask.
class PseCodec {
 public:
  PseCodec(int n_speakers, int max_overlap);

  int n_speakers() const { return n_; }
  int max_overlap() const { return k_; }
  int num_classes() const { return static_cast<int>(table_.size()); }
  const std::vector<unsigned>& class_table() const { return table_; }

  bool valid_mask(unsigned mask) const;
  int encode_mask(unsigned mask) const;
  unsigned decode_mask(int class_id) const;

  int encode(std::span<const std::uint8_t> labels) const;
  std::vector<std::uint8_t> decode(int class_id) const;

  std::vector<int> encode_sequence(
      const LabelMatrix& labels,
      OverflowPolicy policy = OverflowPolicy::kStrict) const;
  LabelMatrix decode_sequence(std::span<const int> class_ids) const;

 private:
  int n_;
  int k_;
  std::vector<unsigned> table_;
  std::vector<int> inverse_;  // mask -> class id, -1 when invalid
};

inline PseCodec build_codec(int n, int k) { return PseCodec(n, k); }

/// Clears all but the k lowest set bits.
unsigned keep_lowest_bits(unsigned mask, int k);

unsigned row_mask(const LabelMatrix& labels, Eigen::Index frame);

// Label files: one line per frame, N space-separated 0/1 tokens.
// `speakers` < 0 infers N from the first line.
LabelMatrix read_labels(std::istream& in, int speakers = -1);
void write_labels(std::ostream& out, const LabelMatrix& labels);

// Encoded label files: one class id per line.
std::vector<int> read_class_ids(std::istream& in);
void write_class_ids(std::ostream& out, std::span<const int> ids);

}  // namespace send

#endif  // SEND_PSE_HPP_
