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

#ifndef SEND_DATASIM_HPP_
#define SEND_DATASIM_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "send/keyvalue.hpp"
#include "send/tensor.hpp"

namespace send {

/// Unit-norm speaker signatures, one row per speaker.
struct SpeakerInventory {
  Tensor signatures;  // N x D
  std::vector<std::string> ids;

  int count() const { return static_cast<int>(signatures.rows()); }
  int dim() const { return static_cast<int>(signatures.cols()); }
};

struct ActivityTemplate {
  LabelMatrix matrix;  // T x N
  double frame_rate = 100.0;

  Eigen::Index frames() const { return matrix.rows(); }
  Eigen::Index speakers() const { return matrix.cols(); }
};

/// Derives an independent 64-bit stream seed from a master seed and a path
/// of integer salts (split, chunk index, attempt, ...).
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> salts);

SpeakerInventory gen_inventory(int n, int d, std::uint64_t seed,
                               const std::string& id_prefix = "spk");

/// Per-speaker two-state Markov activity, sampled jointly. Frame 0 draws
/// from the stationary distribution. When a frame would exceed
/// max_overlap, speakers already talking keep talking and new activations
/// are admitted in speaker-index order until the cap is reached. A speaker
/// holds its state for at least min_run frames after each switch.
ActivityTemplate gen_template(int frames, int speakers, double on_prob,
                              double off_prob, int max_overlap,
                              std::uint64_t seed, double frame_rate = 100.0,
                              int min_run = 1);
ActivityTemplate gen_template(int frames, const SpeakerInventory& inventory,
                              double on_prob, double off_prob, int max_overlap,
                              std::uint64_t seed, double frame_rate = 100.0,
                              int min_run = 1);

/// Picks `count` distinct rows of `signatures` whose pairwise |cosine| is at
/// most max_cosine. Candidates are visited in a seeded random order and
/// accepted greedily; each of `attempts` passes reshuffles. Throws
/// GenerationError when no pass succeeds.
std::vector<int> pick_speakers(const Tensor& signatures, int count,
                               double max_cosine, std::uint64_t seed,
                               int attempts = 64);

/// Frames with >= 2 active speakers over frames with >= 1; 0 without speech.
double overlap_ratio(const LabelMatrix& activity);

/// x_t = sum over active n of g * s_n + noise. One gain per contiguous
/// active run, uniform in gain_range; noise ~ N(0, noise_sigma^2 I).
Tensor render_features(const LabelMatrix& activity, const Tensor& signatures,
                       double noise_sigma, std::pair<double, double> gain_range,
                       std::uint64_t seed);

struct CorpusConfig {
  int speakers = 4;
  int max_overlap = 4;
  int feat_dim = 16;
  int chunk_frames = 400;
  double frame_rate = 100.0;
  int train_chunks = 2000;
  int eval_chunks = 200;
  int test_chunks = 200;
  int speaker_pool = 1024;  // distinct speakers per split
  double on_prob = 0.002;
  double off_prob = 0.0075;
  int min_run = 50;          // frames
  double max_cosine = 0.2;   // between speakers of one chunk
  double noise_sigma = 0.5;
  double gain_lo = 0.8;
  double gain_hi = 1.2;
  double embed_noise = 0.0;
  double overlap_lo = 0.30;
  double overlap_hi = 0.45;
  int max_retries = 20;

  static CorpusConfig from(const KeyValues& kv);
  KeyValues to_key_values() const;
  void validate() const;
};

struct SplitSummary {
  std::string name;
  int chunks = 0;
  double overlap_ratio = 0.0;
  int attempts = 0;
};

struct CorpusSummary {
  std::vector<SplitSummary> splits;
};

inline const std::vector<std::string>& corpus_splits() {
  static const std::vector<std::string> names = {"train", "eval", "test"};
  return names;
}

/// Generates and writes train/eval/test splits under `root`:
///
///   <root>/manifest.txt
///   <root>/<split>/speakers.emb        "P D" header, then P rows
///   <root>/<split>/chunk_<idx>.feat    "T F" header, then T rows
///   <root>/<split>/chunk_<idx>.lab     label file, T rows of N tokens
///
/// Each split is regenerated with a fresh attempt salt until its pooled
/// overlap ratio lies in [overlap_lo, overlap_hi]. Nothing is written when
/// a split misses the band after max_retries attempts.
CorpusSummary make_corpus(const CorpusConfig& config, std::uint64_t seed,
                          const std::filesystem::path& root);

struct Chunk {
  std::string name;
  Tensor features;           // T x F
  LabelMatrix labels;        // T x N
  std::vector<int> speakers;  // rows of the split's embedding table
};

struct CorpusManifest {
  CorpusConfig config;
  std::uint64_t seed = 0;
  std::vector<SplitSummary> splits;
};

struct DataSplit {
  std::string name;
  CorpusManifest manifest;
  Tensor embeddings;  // pool x D
  std::vector<Chunk> chunks;

  /// N x D embeddings of the speakers in `chunk`, in label column order.
  Tensor chunk_embeddings(const Chunk& chunk) const;
};

CorpusManifest read_manifest(const std::filesystem::path& root);
/// Loads a split; `limit` > 0 keeps only the first `limit` chunks.
DataSplit load_split(const std::filesystem::path& root,
                     const std::string& split, int limit = 0);

Tensor read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const Tensor& m);

}  // namespace send

#endif  // SEND_DATASIM_HPP_
