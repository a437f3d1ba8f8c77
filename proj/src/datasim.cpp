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

#include "send/datasim.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "send/pse.hpp"

namespace send {

namespace fs = std::filesystem;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
  // 53 random bits -> [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

constexpr std::uint64_t kSaltPool = 0x706f6f6c;
constexpr std::uint64_t kSaltEmbed = 0x656d6264;
constexpr std::uint64_t kSaltTemplate = 0x74706c;
constexpr std::uint64_t kSaltRender = 0x726e6472;
constexpr std::uint64_t kSaltPick = 0x7069636b;

std::uint64_t split_salt(const std::string& split) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : split) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  out.append(buf, ptr);
}

std::string matrix_text(const Tensor& m) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) +
                    "\n";
  out.reserve(out.size() + static_cast<std::size_t>(m.size()) * 14);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(' ');
      append_number(out, m(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

struct SplitData {
  SplitSummary summary;
  Tensor embeddings;
  std::vector<Chunk> chunks;
};

SplitData generate_split(const CorpusConfig& cfg, std::uint64_t seed,
                         const std::string& split, int count) {
  const std::uint64_t salt = split_salt(split);
  SpeakerInventory pool = gen_inventory(
      cfg.speaker_pool, cfg.feat_dim, derive_seed(seed, {salt, kSaltPool}),
      split + "_spk");

  SplitData data;
  data.summary.name = split;
  data.summary.chunks = count;
  data.embeddings = pool.signatures;
  if (cfg.embed_noise > 0.0) {
    std::mt19937_64 rng(derive_seed(seed, {salt, kSaltEmbed}));
    std::normal_distribution<double> gauss(0.0, cfg.embed_noise);
    for (Eigen::Index i = 0; i < data.embeddings.size(); ++i) {
      data.embeddings.data()[i] += gauss(rng);
    }
  }

  double ratio = 0.0;
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    data.chunks.clear();
    long speech = 0, overlap = 0;
    for (int i = 0; i < count; ++i) {
      const auto idx = static_cast<std::uint64_t>(i);
      const auto att = static_cast<std::uint64_t>(attempt);
      Chunk chunk;
      chunk.name = "chunk_" + std::to_string(i);

      chunk.speakers = pick_speakers(
          pool.signatures, cfg.speakers, cfg.max_cosine,
          derive_seed(seed, {salt, kSaltPick, att, idx}));

      ActivityTemplate tpl = gen_template(
          cfg.chunk_frames, cfg.speakers, cfg.on_prob, cfg.off_prob,
          cfg.max_overlap, derive_seed(seed, {salt, kSaltTemplate, att, idx}),
          cfg.frame_rate, cfg.min_run);
      Tensor sigs(cfg.speakers, cfg.feat_dim);
      for (int k = 0; k < cfg.speakers; ++k) {
        sigs.row(k) = pool.signatures.row(chunk.speakers[k]);
      }
      chunk.features = render_features(
          tpl.matrix, sigs, cfg.noise_sigma, {cfg.gain_lo, cfg.gain_hi},
          derive_seed(seed, {salt, kSaltRender, att, idx}));
      chunk.labels = std::move(tpl.matrix);
      for (Eigen::Index t = 0; t < chunk.labels.rows(); ++t) {
        const int active = std::popcount(row_mask(chunk.labels, t));
        speech += active >= 1;
        overlap += active >= 2;
      }
      data.chunks.push_back(std::move(chunk));
    }
    ratio = speech == 0 ? 0.0
                        : static_cast<double>(overlap) /
                              static_cast<double>(speech);
    data.summary.overlap_ratio = ratio;
    data.summary.attempts = attempt + 1;
    if (ratio >= cfg.overlap_lo && ratio <= cfg.overlap_hi) return data;
  }
  std::ostringstream msg;
  msg << "split '" << split << "': overlap ratio " << ratio
      << " outside target band [" << cfg.overlap_lo << ", " << cfg.overlap_hi
      << "] after " << cfg.max_retries << " attempts";
  throw GenerationError(msg.str(), ratio);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> salts) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t s : salts) h = splitmix64(h ^ splitmix64(s + 0x51ed27));
  return h;
}

SpeakerInventory gen_inventory(int n, int d, std::uint64_t seed,
                               const std::string& id_prefix) {
  if (n < 1) throw DomainError("gen_inventory: need at least one speaker");
  if (d < 2) throw DomainError("gen_inventory: dimension must be >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpeakerInventory inv;
  inv.signatures.resize(n, d);
  for (int s = 0; s < n; ++s) {
    double norm = 0.0;
    do {
      for (int k = 0; k < d; ++k) inv.signatures(s, k) = gauss(rng);
      norm = inv.signatures.row(s).norm();
    } while (norm < 1e-12);
    inv.signatures.row(s) /= norm;
    inv.ids.push_back(id_prefix + std::to_string(s));
  }
  return inv;
}

ActivityTemplate gen_template(int frames, int speakers, double on_prob,
                              double off_prob, int max_overlap,
                              std::uint64_t seed, double frame_rate,
                              int min_run) {
  if (frames < 1 || speakers < 1) {
    throw DomainError("gen_template: frames and speakers must be positive");
  }
  if (!(on_prob > 0.0 && on_prob < 1.0 && off_prob > 0.0 && off_prob < 1.0)) {
    throw DomainError("gen_template: probabilities must lie in (0, 1)");
  }
  if (max_overlap < 1) throw DomainError("gen_template: max_overlap < 1");
  if (min_run < 1) throw DomainError("gen_template: min_run < 1");

  std::mt19937_64 rng(seed);
  ActivityTemplate tpl;
  tpl.frame_rate = frame_rate;
  tpl.matrix = LabelMatrix::Zero(frames, speakers);
  const double stationary = on_prob / (on_prob + off_prob);
  std::vector<std::uint8_t> active(static_cast<std::size_t>(speakers), 0);
  std::vector<double> u(static_cast<std::size_t>(speakers));
  // Frames since the last switch; the initial state counts as settled.
  std::vector<int> age(static_cast<std::size_t>(speakers), min_run);

  for (int t = 0; t < frames; ++t) {
    for (int s = 0; s < speakers; ++s) u[s] = uniform01(rng);
    int count = 0;
    if (t == 0) {
      for (int s = 0; s < speakers; ++s) {
        active[s] = u[s] < stationary && count < max_overlap;
        count += active[s];
      }
    } else {
      // Continuing speakers first, so they always keep their slot.
      std::vector<std::uint8_t> next(active.size(), 0);
      for (int s = 0; s < speakers; ++s) {
        if (active[s] && (age[s] < min_run || !(u[s] < off_prob))) {
          next[s] = 1;
          ++count;
        }
      }
      for (int s = 0; s < speakers; ++s) {
        if (!active[s] && age[s] >= min_run && u[s] < on_prob &&
            count < max_overlap) {
          next[s] = 1;
          ++count;
        }
      }
      for (int s = 0; s < speakers; ++s) {
        age[s] = next[s] == active[s] ? age[s] + 1 : 1;
      }
      active.swap(next);
    }
    for (int s = 0; s < speakers; ++s) tpl.matrix(t, s) = active[s];
  }
  return tpl;
}

ActivityTemplate gen_template(int frames, const SpeakerInventory& inventory,
                              double on_prob, double off_prob, int max_overlap,
                              std::uint64_t seed, double frame_rate,
                              int min_run) {
  return gen_template(frames, inventory.count(), on_prob, off_prob,
                      max_overlap, seed, frame_rate, min_run);
}

std::vector<int> pick_speakers(const Tensor& signatures, int count,
                               double max_cosine, std::uint64_t seed,
                               int attempts) {
  const int pool = static_cast<int>(signatures.rows());
  if (count < 1 || count > pool) {
    throw DomainError("pick_speakers: cannot pick " + std::to_string(count) +
                      " of " + std::to_string(pool));
  }
  auto cosine = [&](int a, int b) {
    return signatures.row(a).dot(signatures.row(b)) /
           (signatures.row(a).norm() * signatures.row(b).norm());
  };
  std::mt19937_64 rng(seed);
  std::vector<int> order(static_cast<std::size_t>(pool));
  std::vector<int> chosen;
  for (int pass = 0; pass < attempts; ++pass) {
    std::iota(order.begin(), order.end(), 0);
    for (int k = pool - 1; k > 0; --k) {
      const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(k + 1));
      std::swap(order[k], order[j]);
    }
    chosen.clear();
    for (int cand : order) {
      bool ok = true;
      for (int c : chosen) ok = ok && std::abs(cosine(cand, c)) <= max_cosine;
      if (ok) chosen.push_back(cand);
      if (static_cast<int>(chosen.size()) == count) return chosen;
    }
  }
  throw GenerationError("pick_speakers: no " + std::to_string(count) +
                            " speakers with |cos| <= " +
                            std::to_string(max_cosine),
                        0.0);
}

double overlap_ratio(const LabelMatrix& activity) {
  long speech = 0, overlap = 0;
  for (Eigen::Index t = 0; t < activity.rows(); ++t) {
    int active = 0;
    for (Eigen::Index s = 0; s < activity.cols(); ++s) {
      active += activity(t, s) != 0;
    }
    speech += active >= 1;
    overlap += active >= 2;
  }
  return speech == 0 ? 0.0
                     : static_cast<double>(overlap) /
                           static_cast<double>(speech);
}

Tensor render_features(const LabelMatrix& activity, const Tensor& signatures,
                       double noise_sigma, std::pair<double, double> gain_range,
                       std::uint64_t seed) {
  if (activity.cols() != signatures.rows()) {
    throw DimensionError("render_features: " +
                         std::to_string(activity.cols()) +
                         " label columns for " +
                         std::to_string(signatures.rows()) + " signatures");
  }
  if (noise_sigma < 0.0) throw DomainError("render_features: noise_sigma < 0");
  const auto [lo, hi] = gain_range;
  if (hi < lo) throw DomainError("render_features: empty gain range");

  std::mt19937_64 rng(seed);
  const Eigen::Index frames = activity.rows();
  const Eigen::Index dim = signatures.cols();
  Tensor x = Tensor::Zero(frames, dim);
  for (Eigen::Index s = 0; s < activity.cols(); ++s) {
    double gain = 0.0;
    for (Eigen::Index t = 0; t < frames; ++t) {
      if (!activity(t, s)) continue;
      if (t == 0 || !activity(t - 1, s)) gain = lo + (hi - lo) * uniform01(rng);
      x.row(t) += gain * signatures.row(s);
    }
  }
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise_sigma);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += gauss(rng);
  }
  return x;
}

CorpusConfig CorpusConfig::from(const KeyValues& kv) {
  kv.require_known(
      {"speakers", "max_overlap", "feat_dim", "chunk_frames", "frame_rate",
       "train_chunks", "eval_chunks", "test_chunks", "speaker_pool",
       "on_prob", "off_prob", "min_run", "max_cosine", "noise_sigma", "gain_lo", "gain_hi",
       "embed_noise", "overlap_lo", "overlap_hi", "max_retries"},
      "corpus config");
  CorpusConfig c;
  c.speakers = static_cast<int>(kv.get_long("speakers", c.speakers));
  c.max_overlap = static_cast<int>(kv.get_long("max_overlap", c.max_overlap));
  c.feat_dim = static_cast<int>(kv.get_long("feat_dim", c.feat_dim));
  c.chunk_frames =
      static_cast<int>(kv.get_long("chunk_frames", c.chunk_frames));
  c.frame_rate = kv.get_double("frame_rate", c.frame_rate);
  c.train_chunks =
      static_cast<int>(kv.get_long("train_chunks", c.train_chunks));
  c.eval_chunks = static_cast<int>(kv.get_long("eval_chunks", c.eval_chunks));
  c.test_chunks = static_cast<int>(kv.get_long("test_chunks", c.test_chunks));
  c.speaker_pool =
      static_cast<int>(kv.get_long("speaker_pool", c.speaker_pool));
  c.on_prob = kv.get_double("on_prob", c.on_prob);
  c.min_run = static_cast<int>(kv.get_long("min_run", c.min_run));
  c.max_cosine = kv.get_double("max_cosine", c.max_cosine);
  c.off_prob = kv.get_double("off_prob", c.off_prob);
  c.noise_sigma = kv.get_double("noise_sigma", c.noise_sigma);
  c.gain_lo = kv.get_double("gain_lo", c.gain_lo);
  c.gain_hi = kv.get_double("gain_hi", c.gain_hi);
  c.embed_noise = kv.get_double("embed_noise", c.embed_noise);
  c.overlap_lo = kv.get_double("overlap_lo", c.overlap_lo);
  c.overlap_hi = kv.get_double("overlap_hi", c.overlap_hi);
  c.max_retries = static_cast<int>(kv.get_long("max_retries", c.max_retries));
  c.validate();
  return c;
}

KeyValues CorpusConfig::to_key_values() const {
  KeyValues kv;
  kv.set("speakers", std::to_string(speakers));
  kv.set("max_overlap", std::to_string(max_overlap));
  kv.set("feat_dim", std::to_string(feat_dim));
  kv.set("chunk_frames", std::to_string(chunk_frames));
  kv.set("frame_rate", format_double(frame_rate));
  kv.set("train_chunks", std::to_string(train_chunks));
  kv.set("eval_chunks", std::to_string(eval_chunks));
  kv.set("test_chunks", std::to_string(test_chunks));
  kv.set("speaker_pool", std::to_string(speaker_pool));
  kv.set("on_prob", format_double(on_prob));
  kv.set("min_run", std::to_string(min_run));
  kv.set("max_cosine", format_double(max_cosine));
  kv.set("off_prob", format_double(off_prob));
  kv.set("noise_sigma", format_double(noise_sigma));
  kv.set("gain_lo", format_double(gain_lo));
  kv.set("gain_hi", format_double(gain_hi));
  kv.set("embed_noise", format_double(embed_noise));
  kv.set("overlap_lo", format_double(overlap_lo));
  kv.set("overlap_hi", format_double(overlap_hi));
  kv.set("max_retries", std::to_string(max_retries));
  return kv;
}

void CorpusConfig::validate() const {
  if (speakers < 1 || speakers > kMaxSpeakers) {
    throw ConfigError("corpus: speakers must be in [1, 16]");
  }
  if (max_overlap < 1 || max_overlap > speakers) {
    throw ConfigError("corpus: max_overlap must be in [1, speakers]");
  }
  if (feat_dim < 2) throw ConfigError("corpus: feat_dim must be >= 2");
  if (chunk_frames < 1) throw ConfigError("corpus: chunk_frames must be >= 1");
  if (!(frame_rate > 0.0)) throw ConfigError("corpus: frame_rate must be > 0");
  if (train_chunks < 1 || eval_chunks < 1 || test_chunks < 1) {
    throw ConfigError("corpus: every split needs at least one chunk");
  }
  if (speaker_pool < speakers) {
    throw ConfigError("corpus: speaker_pool smaller than speakers");
  }
  if (!(on_prob > 0.0 && on_prob < 1.0 && off_prob > 0.0 && off_prob < 1.0)) {
    throw ConfigError("corpus: on_prob and off_prob must lie in (0, 1)");
  }
  if (noise_sigma < 0.0 || embed_noise < 0.0) {
    throw ConfigError("corpus: noise levels must be >= 0");
  }
  if (gain_hi < gain_lo) throw ConfigError("corpus: gain_hi < gain_lo");
  if (overlap_hi < overlap_lo) throw ConfigError("corpus: empty overlap band");
  if (max_retries < 1) throw ConfigError("corpus: max_retries must be >= 1");
  if (min_run < 1) throw ConfigError("corpus: min_run must be >= 1");
  if (!(max_cosine > 0.0 && max_cosine <= 1.0)) {
    throw ConfigError("corpus: max_cosine must lie in (0, 1]");
  }
}

CorpusSummary make_corpus(const CorpusConfig& config, std::uint64_t seed,
                          const fs::path& root) {
  config.validate();
  std::vector<SplitData> splits;
  const int counts[] = {config.train_chunks, config.eval_chunks,
                        config.test_chunks};
  for (std::size_t i = 0; i < corpus_splits().size(); ++i) {
    splits.push_back(
        generate_split(config, seed, corpus_splits()[i], counts[i]));
  }

  fs::create_directories(root);
  std::ostringstream manifest;
  manifest << "format send-corpus-1\n";
  manifest << "seed " << seed << '\n';
  const KeyValues kv = config.to_key_values();
  for (const auto& [k, v] : kv.entries()) {
    manifest << "config " << k << ' ' << v << '\n';
  }
  CorpusSummary summary;
  for (const SplitData& s : splits) {
    manifest << "split " << s.summary.name << ' ' << s.summary.chunks << ' '
             << format_double(s.summary.overlap_ratio) << ' '
             << s.summary.attempts << '\n';
    summary.splits.push_back(s.summary);
  }
  for (const SplitData& s : splits) {
    const fs::path dir = root / s.summary.name;
    fs::create_directories(dir);
    write_text(dir / "speakers.emb", matrix_text(s.embeddings));
    for (const Chunk& c : s.chunks) {
      write_text(dir / (c.name + ".feat"), matrix_text(c.features));
      std::ostringstream lab;
      write_labels(lab, c.labels);
      write_text(dir / (c.name + ".lab"), lab.str());
      manifest << "chunk " << s.summary.name << ' ' << c.name;
      for (int spk : c.speakers) manifest << ' ' << spk;
      manifest << '\n';
    }
  }
  write_text(root / "manifest.txt", manifest.str());
  return summary;
}

Tensor read_matrix_file(const fs::path& path) {
  const std::string text = read_text(path);
  const char* p = text.data();
  const char* end = p + text.size();
  auto skip = [&]() {
    while (p < end && (*p == ' ' || *p == '\n' || *p == '\r' || *p == '\t')) {
      ++p;
    }
  };
  auto next_long = [&]() {
    skip();
    long v = 0;
    auto [ptr, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) {
      throw ParseError(path.string() + ": bad matrix header", 1);
    }
    p = ptr;
    return v;
  };
  const long rows = next_long();
  const long cols = next_long();
  if (rows < 1 || cols < 1) {
    throw ParseError(path.string() + ": bad matrix header", 1);
  }
  Tensor m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    skip();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) {
      throw ParseError(path.string() + ": bad or missing value " +
                           std::to_string(i),
                       2 + i / cols);
    }
    m.data()[i] = v;
    p = ptr;
  }
  skip();
  if (p != end) {
    throw ParseError(path.string() + ": trailing data after matrix", rows + 1);
  }
  return m;
}

void write_matrix_file(const fs::path& path, const Tensor& m) {
  write_text(path, matrix_text(m));
}

CorpusManifest read_manifest(const fs::path& root) {
  std::ifstream in(root / "manifest.txt");
  if (!in) throw InputError("no manifest.txt under " + root.string());
  CorpusManifest m;
  KeyValues kv;
  std::string line;
  long lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream tok(line);
    std::string kind;
    if (!(tok >> kind)) continue;
    if (kind == "format") {
      std::string fmt;
      tok >> fmt;
      if (fmt != "send-corpus-1") {
        throw ParseError("manifest: unsupported format '" + fmt + "'", lineno);
      }
      header = true;
    } else if (kind == "seed") {
      tok >> m.seed;
    } else if (kind == "config") {
      std::string k, v;
      tok >> k >> v;
      kv.set(k, v);
    } else if (kind == "split") {
      SplitSummary s;
      tok >> s.name >> s.chunks >> s.overlap_ratio >> s.attempts;
      if (!tok) throw ParseError("manifest: bad split line", lineno);
      m.splits.push_back(s);
    }
  }
  if (!header) throw ParseError("manifest: missing format line", 1);
  m.config = CorpusConfig::from(kv);
  return m;
}

DataSplit load_split(const fs::path& root, const std::string& split,
                     int limit) {
  DataSplit data;
  data.name = split;
  data.manifest = read_manifest(root);
  const CorpusConfig& cfg = data.manifest.config;
  const fs::path dir = root / split;
  data.embeddings = read_matrix_file(dir / "speakers.emb");
  if (data.embeddings.cols() != cfg.feat_dim) {
    throw InputError("speakers.emb dimension does not match manifest");
  }

  std::ifstream in(root / "manifest.txt");
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream tok(line);
    std::string kind, sp, name;
    if (!(tok >> kind) || kind != "chunk") continue;
    tok >> sp >> name;
    if (sp != split) continue;
    if (limit > 0 && static_cast<int>(data.chunks.size()) >= limit) break;
    Chunk c;
    c.name = name;
    int idx = 0;
    while (tok >> idx) {
      if (idx < 0 || idx >= data.embeddings.rows()) {
        throw InputError("manifest: speaker index out of range in " + name);
      }
      c.speakers.push_back(idx);
    }
    if (static_cast<int>(c.speakers.size()) != cfg.speakers) {
      throw InputError("manifest: chunk " + name + " lists " +
                       std::to_string(c.speakers.size()) + " speakers");
    }
    c.features = read_matrix_file(dir / (name + ".feat"));
    std::ifstream lab(dir / (name + ".lab"));
    if (!lab) throw InputError("missing label file for " + name);
    c.labels = read_labels(lab, cfg.speakers);
    if (c.labels.rows() != c.features.rows()) {
      throw InputError("chunk " + name + ": feature and label frame counts differ");
    }
    if (c.features.cols() != cfg.feat_dim) {
      throw InputError("chunk " + name + ": feature dimension mismatch");
    }
    data.chunks.push_back(std::move(c));
  }
  if (data.chunks.empty()) {
    throw InputError("split '" + split + "' has no chunks under " +
                     root.string());
  }
  return data;
}

Tensor DataSplit::chunk_embeddings(const Chunk& chunk) const {
  Tensor e(static_cast<Eigen::Index>(chunk.speakers.size()),
           embeddings.cols());
  for (std::size_t k = 0; k < chunk.speakers.size(); ++k) {
    e.row(static_cast<Eigen::Index>(k)) = embeddings.row(chunk.speakers[k]);
  }
  return e;
}

}  // namespace send
