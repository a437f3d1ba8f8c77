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

#include "send/pse.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace send {

namespace {

void check_domain(int n, int k) {
  if (n < 1 || n > kMaxSpeakers) {
    throw DomainError("speaker count " + std::to_string(n) +
                      " outside [1, 16]");
  }
  if (k < 1 || k > n) {
    throw DomainError("max overlap " + std::to_string(k) + " outside [1, " +
                      std::to_string(n) + "]");
  }
}

}  // namespace

int num_classes(int n, int k) {
  check_domain(n, k);
  long total = 0;
  long binom = 1;  // C(n, j)
  for (int j = 0; j <= k; ++j) {
    total += binom;
    binom = binom * (n - j) / (j + 1);
  }
  return static_cast<int>(total);
}

PseCodec::PseCodec(int n_speakers, int max_overlap)
    : n_(n_speakers), k_(max_overlap) {
  check_domain(n_, k_);
  const unsigned limit = 1u << n_;
  inverse_.assign(limit, -1);
  table_.reserve(static_cast<std::size_t>(send::num_classes(n_, k_)));
  for (unsigned mask = 0; mask < limit; ++mask) {
    if (std::popcount(mask) <= k_) {
      inverse_[mask] = static_cast<int>(table_.size());
      table_.push_back(mask);
    }
  }
}

bool PseCodec::valid_mask(unsigned mask) const {
  return mask < inverse_.size() && inverse_[mask] >= 0;
}

int PseCodec::encode_mask(unsigned mask) const {
  if (mask >= inverse_.size()) {
    throw IndexError("mask " + std::to_string(mask) + " has bits beyond " +
                     std::to_string(n_) + " speakers");
  }
  const int id = inverse_[mask];
  if (id < 0) {
    throw CardinalityError("mask " + std::to_string(mask) + " has " +
                               std::to_string(std::popcount(mask)) +
                               " active speakers, max overlap is " +
                               std::to_string(k_),
                           mask);
  }
  return id;
}

unsigned PseCodec::decode_mask(int class_id) const {
  if (class_id < 0 || class_id >= num_classes()) {
    throw IndexError("class id " + std::to_string(class_id) +
                     " outside [0, " + std::to_string(num_classes()) + ")");
  }
  return table_[static_cast<std::size_t>(class_id)];
}

int PseCodec::encode(std::span<const std::uint8_t> labels) const {
  if (static_cast<int>(labels.size()) != n_) {
    throw DimensionError("encode: expected " + std::to_string(n_) +
                         " labels, got " + std::to_string(labels.size()));
  }
  unsigned mask = 0;
  for (int s = 0; s < n_; ++s) {
    if (labels[s] > 1) throw DomainError("encode: labels must be 0 or 1");
    if (labels[s]) mask |= 1u << s;
  }
  return encode_mask(mask);
}

std::vector<std::uint8_t> PseCodec::decode(int class_id) const {
  const unsigned mask = decode_mask(class_id);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(n_));
  for (int s = 0; s < n_; ++s) out[s] = (mask >> s) & 1u;
  return out;
}

unsigned keep_lowest_bits(unsigned mask, int k) {
  unsigned out = 0;
  for (int kept = 0; mask != 0 && kept < k; ++kept) {
    const unsigned low = mask & (~mask + 1u);
    out |= low;
    mask &= ~low;
  }
  return out;
}

unsigned row_mask(const LabelMatrix& labels, Eigen::Index frame) {
  unsigned mask = 0;
  for (Eigen::Index s = 0; s < labels.cols(); ++s) {
    const std::uint8_t v = labels(frame, s);
    if (v > 1) {
      throw DomainError("label matrix entry at frame " +
                        std::to_string(frame) + " is not binary");
    }
    if (v) mask |= 1u << s;
  }
  return mask;
}

std::vector<int> PseCodec::encode_sequence(const LabelMatrix& labels,
                                           OverflowPolicy policy) const {
  if (labels.cols() != n_) {
    throw DimensionError("encode_sequence: labels have " +
                         std::to_string(labels.cols()) +
                         " speakers, codec expects " + std::to_string(n_));
  }
  std::vector<int> ids(static_cast<std::size_t>(labels.rows()));
  for (Eigen::Index t = 0; t < labels.rows(); ++t) {
    unsigned mask = row_mask(labels, t);
    if (std::popcount(mask) > k_) {
      if (policy == OverflowPolicy::kStrict) {
        throw CardinalityError(
            "frame " + std::to_string(t) + " has " +
                std::to_string(std::popcount(mask)) +
                " active speakers, max overlap is " + std::to_string(k_),
            mask, static_cast<long>(t));
      }
      mask = keep_lowest_bits(mask, k_);
    }
    ids[static_cast<std::size_t>(t)] = inverse_[mask];
  }
  return ids;
}

LabelMatrix PseCodec::decode_sequence(std::span<const int> class_ids) const {
  LabelMatrix out(static_cast<Eigen::Index>(class_ids.size()), n_);
  for (std::size_t t = 0; t < class_ids.size(); ++t) {
    const unsigned mask = decode_mask(class_ids[t]);
    for (int s = 0; s < n_; ++s) {
      out(static_cast<Eigen::Index>(t), s) = (mask >> s) & 1u;
    }
  }
  return out;
}

LabelMatrix read_labels(std::istream& in, int speakers) {
  std::vector<std::vector<std::uint8_t>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream tokens(line);
    std::vector<std::uint8_t> row;
    std::string tok;
    while (tokens >> tok) {
      if (tok == "0") {
        row.push_back(0);
      } else if (tok == "1") {
        row.push_back(1);
      } else {
        throw ParseError("label file line " + std::to_string(lineno) +
                             ": token '" + tok + "' is not 0 or 1",
                         lineno);
      }
    }
    if (row.empty()) continue;
    if (speakers < 0) speakers = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != speakers) {
      throw ParseError("label file line " + std::to_string(lineno) + ": " +
                           std::to_string(row.size()) + " tokens, expected " +
                           std::to_string(speakers),
                       lineno);
    }
    rows.push_back(std::move(row));
  }
  LabelMatrix out(static_cast<Eigen::Index>(rows.size()),
                  std::max(speakers, 0));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (int s = 0; s < speakers; ++s) {
      out(static_cast<Eigen::Index>(t), s) = rows[t][s];
    }
  }
  return out;
}

void write_labels(std::ostream& out, const LabelMatrix& labels) {
  for (Eigen::Index t = 0; t < labels.rows(); ++t) {
    for (Eigen::Index s = 0; s < labels.cols(); ++s) {
      if (s) out << ' ';
      out << (labels(t, s) ? '1' : '0');
    }
    out << '\n';
  }
}

std::vector<int> read_class_ids(std::istream& in) {
  std::vector<int> ids;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    std::string extra;
    if (used != tok.size() || (tokens >> extra)) {
      throw ParseError("class id file line " + std::to_string(lineno) +
                           ": expected a single integer",
                       lineno);
    }
    ids.push_back(v);
  }
  return ids;
}

void write_class_ids(std::ostream& out, std::span<const int> ids) {
  for (int id : ids) out << id << '\n';
}

}  // namespace send
