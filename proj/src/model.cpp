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

#include "send/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "send/pse.hpp"

namespace send {

namespace {

std::string layer_name(const char* block, std::size_t i) {
  return std::string(block) + ".layer" + std::to_string(i);
}

std::vector<FsmnSpec> fsmn_stack(std::initializer_list<int> strides,
                                 int left = 1, int right = 1) {
  std::vector<FsmnSpec> out;
  for (int s : strides) out.push_back({left, right, s});
  return out;
}

const char* cd_name(CdKind k) {
  return k == CdKind::kAttention ? "attention" : "none";
}

const char* head_name(HeadKind k) {
  return k == HeadKind::kPse ? "pse" : "multilabel";
}

std::string join(const std::vector<long>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

std::vector<FsmnSpec> parse_stack(const KeyValues& kv, const std::string& pfx,
                                  const std::vector<FsmnSpec>& fallback) {
  std::vector<long> strides, left, right;
  for (const FsmnSpec& s : fallback) {
    strides.push_back(s.stride);
    left.push_back(s.left_order);
    right.push_back(s.right_order);
  }
  strides = kv.get_longs(pfx + "_strides", strides);
  left = kv.get_longs(pfx + "_left", left);
  right = kv.get_longs(pfx + "_right", right);
  auto pick = [&](const std::vector<long>& v, std::size_t i,
                  const char* what) -> int {
    if (v.size() == 1) return static_cast<int>(v[0]);
    if (v.size() != strides.size()) {
      throw ConfigError("model config: " + pfx + "_" + what + " has " +
                        std::to_string(v.size()) + " entries for " +
                        std::to_string(strides.size()) + " layers");
    }
    return static_cast<int>(v[i]);
  };
  std::vector<FsmnSpec> out;
  for (std::size_t i = 0; i < strides.size(); ++i) {
    out.push_back({pick(left, i, "left"), pick(right, i, "right"),
                   static_cast<int>(strides[i])});
  }
  return out;
}

class Init {
 public:
  explicit Init(std::uint64_t seed) : rng_(seed) {}

  Tensor normal(Eigen::Index rows, Eigen::Index cols, double stddev) {
    std::normal_distribution<double> g(0.0, stddev);
    Tensor t(rows, cols);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = g(rng_);
    return t;
  }

 private:
  std::mt19937_64 rng_;
};

void add_fsmn(ParamStore& ps, Init& init, const std::string& name, int in,
              int out, const FsmnSpec& spec) {
  const double taps = spec.left_order + spec.right_order + 2;
  ps.add(name + ".past",
         init.normal(spec.left_order + 1, in, 1.0 / std::sqrt(taps)));
  ps.add(name + ".future",
         init.normal(spec.right_order + 1, in, 1.0 / std::sqrt(taps)));
  ps.add(name + ".w", init.normal(out, in, std::sqrt(1.0 / in)));
  ps.add(name + ".w_mem", init.normal(out, in, std::sqrt(1.0 / in)));
  ps.add(name + ".b", Tensor::Zero(1, out));
}

long fsmn_param_count(int in, int out, const FsmnSpec& s) {
  return static_cast<long>(s.left_order + 1 + s.right_order + 1) * in +
         2L * out * in + out;
}

}  // namespace

int ModelConfig::head_width() const {
  return head == HeadKind::kPse ? num_classes(speakers, max_overlap)
                                : speakers;
}

int ModelConfig::score_width() const {
  return (use_ci ? speakers : 0) + (cd != CdKind::kNone ? speakers : 0);
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v < 1) throw ConfigError(std::string("model config: ") + what +
                                 " must be positive");
  };
  positive(feat_dim, "feat_dim");
  positive(embed_dim, "embed_dim");
  positive(hidden, "hidden");
  positive(speaker_layers, "speaker_layers");
  positive(postnet_hidden, "postnet_hidden");
  positive(attention_context, "attention_context");
  if (speech_layers.empty()) {
    throw ConfigError("model config: speech encoder needs at least one layer");
  }
  if (postnet_layers.empty()) {
    throw ConfigError("model config: post-net needs at least one layer");
  }
  for (const auto* stack : {&speech_layers, &postnet_layers}) {
    for (const FsmnSpec& s : *stack) {
      if (s.left_order < 0 || s.right_order < 0 || s.stride < 1) {
        throw ConfigError("model config: FSMN orders must be >= 0, stride >= 1");
      }
    }
  }
  if (!use_ci && cd == CdKind::kNone) {
    throw ConfigError("model config: at least one scorer must be enabled");
  }
  if (cd == CdKind::kAttention) {
    positive(cd_layers, "cd_layers");
    positive(cd_heads, "cd_heads");
    positive(cd_dim, "cd_dim");
    positive(cd_ffn, "cd_ffn");
    if (cd_dim % cd_heads != 0) {
      throw ConfigError("model config: cd_dim must be divisible by cd_heads");
    }
  }
  if (speakers < 1 || speakers > kMaxSpeakers || max_overlap < 1 ||
      max_overlap > speakers) {
    throw ConfigError("model config: need 1 <= max_overlap <= speakers <= 16");
  }
}

ModelConfig ModelConfig::preset(const std::string& name) {
  ModelConfig c;
  if (name == "small") {
    c.speech_layers = fsmn_stack({1, 2, 4, 8});
    c.postnet_layers = fsmn_stack({1, 2, 4});
    c.attention_context = 100;
  } else if (name == "tiny") {
    c.feat_dim = 6;
    c.embed_dim = 6;
    c.hidden = 8;
    c.speech_layers = fsmn_stack({1, 2});
    c.speaker_layers = 2;
    c.cd_layers = 1;
    c.cd_heads = 2;
    c.cd_dim = 8;
    c.cd_ffn = 8;
    c.postnet_hidden = 8;
    c.postnet_layers = fsmn_stack({1, 2});
    c.speakers = 2;
    c.max_overlap = 2;
    c.attention_context = 8;
  } else if (name == "paper") {
    c.feat_dim = 80;
    c.embed_dim = 512;
    c.hidden = 512;
    c.speech_layers = fsmn_stack({1, 2, 4, 8, 1, 2, 4, 8});
    c.speaker_layers = 3;
    c.cd_layers = 4;
    c.cd_heads = 4;
    c.cd_dim = 512;
    c.cd_ffn = 512;
    c.postnet_hidden = 512;
    c.postnet_layers = fsmn_stack({1, 2, 4, 8, 1, 1});
    c.attention_context = 1600;
  } else {
    throw ConfigError("unknown model preset '" + name + "'");
  }
  c.validate();
  return c;
}

ModelConfig ModelConfig::from(const KeyValues& kv) {
  kv.require_known(
      {"preset", "feat_dim", "embed_dim", "hidden", "speech_strides",
       "speech_left", "speech_right", "speaker_layers", "ci", "cd",
       "cd_layers", "cd_heads", "cd_dim", "cd_ffn", "postnet_hidden",
       "postnet_strides", "postnet_left", "postnet_right", "head", "speakers",
       "max_overlap", "attention_context"},
      "model config");
  ModelConfig c = preset(kv.get_string("preset", "small"));
  c.feat_dim = static_cast<int>(kv.get_long("feat_dim", c.feat_dim));
  c.embed_dim = static_cast<int>(kv.get_long("embed_dim", c.embed_dim));
  c.hidden = static_cast<int>(kv.get_long("hidden", c.hidden));
  c.speech_layers = parse_stack(kv, "speech", c.speech_layers);
  c.speaker_layers =
      static_cast<int>(kv.get_long("speaker_layers", c.speaker_layers));
  c.use_ci = kv.get_bool("ci", c.use_ci);
  const std::string cd = kv.get_string("cd", cd_name(c.cd));
  if (cd == "attention") {
    c.cd = CdKind::kAttention;
  } else if (cd == "none") {
    c.cd = CdKind::kNone;
  } else {
    throw ConfigError("model config: cd must be 'attention' or 'none'");
  }
  c.cd_layers = static_cast<int>(kv.get_long("cd_layers", c.cd_layers));
  c.cd_heads = static_cast<int>(kv.get_long("cd_heads", c.cd_heads));
  c.cd_dim = static_cast<int>(kv.get_long("cd_dim", c.cd_dim));
  c.cd_ffn = static_cast<int>(kv.get_long("cd_ffn", c.cd_ffn));
  c.postnet_hidden =
      static_cast<int>(kv.get_long("postnet_hidden", c.postnet_hidden));
  c.postnet_layers = parse_stack(kv, "postnet", c.postnet_layers);
  const std::string head = kv.get_string("head", head_name(c.head));
  if (head == "pse") {
    c.head = HeadKind::kPse;
  } else if (head == "multilabel") {
    c.head = HeadKind::kMultilabel;
  } else {
    throw ConfigError("model config: head must be 'pse' or 'multilabel'");
  }
  c.speakers = static_cast<int>(kv.get_long("speakers", c.speakers));
  c.max_overlap = static_cast<int>(kv.get_long("max_overlap", c.max_overlap));
  c.attention_context =
      static_cast<int>(kv.get_long("attention_context", c.attention_context));
  c.validate();
  return c;
}

KeyValues ModelConfig::to_key_values() const {
  KeyValues kv;
  auto stack = [&](const std::string& pfx, const std::vector<FsmnSpec>& s) {
    std::vector<long> st, l, r;
    for (const FsmnSpec& f : s) {
      st.push_back(f.stride);
      l.push_back(f.left_order);
      r.push_back(f.right_order);
    }
    kv.set(pfx + "_strides", join(st));
    kv.set(pfx + "_left", join(l));
    kv.set(pfx + "_right", join(r));
  };
  kv.set("feat_dim", std::to_string(feat_dim));
  kv.set("embed_dim", std::to_string(embed_dim));
  kv.set("hidden", std::to_string(hidden));
  stack("speech", speech_layers);
  kv.set("speaker_layers", std::to_string(speaker_layers));
  kv.set("ci", use_ci ? "true" : "false");
  kv.set("cd", cd_name(cd));
  kv.set("cd_layers", std::to_string(cd_layers));
  kv.set("cd_heads", std::to_string(cd_heads));
  kv.set("cd_dim", std::to_string(cd_dim));
  kv.set("cd_ffn", std::to_string(cd_ffn));
  kv.set("postnet_hidden", std::to_string(postnet_hidden));
  stack("postnet", postnet_layers);
  kv.set("head", head_name(head));
  kv.set("speakers", std::to_string(speakers));
  kv.set("max_overlap", std::to_string(max_overlap));
  kv.set("attention_context", std::to_string(attention_context));
  return kv;
}

Var fsmn_memory(Var h, Var past, Var future, int stride) {
  const Tensor& hv = h.value();
  const Eigen::Index frames = hv.rows();
  const Eigen::Index dim = hv.cols();
  if (past.cols() != dim || future.cols() != dim) {
    throw DimensionError("fsmn_memory: taps must have width " +
                         std::to_string(dim));
  }
  if (stride < 1) throw DomainError("fsmn_memory: stride must be >= 1");
  const Tensor& a = past.value();
  const Tensor& c = future.value();
  Tensor m = Tensor::Zero(frames, dim);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Eigen::Index off = i * stride;
    if (off >= frames) break;
    m.bottomRows(frames - off).array() +=
        hv.topRows(frames - off).array().rowwise() * a.row(i).array();
  }
  for (Eigen::Index j = 0; j < c.rows(); ++j) {
    const Eigen::Index off = j * stride;
    if (off >= frames) break;
    m.topRows(frames - off).array() +=
        hv.bottomRows(frames - off).array().rowwise() * c.row(j).array();
  }
  const int ih = h.id(), ia = past.id(), ic = future.id();
  return h.tape()->record(
      std::move(m), {h, past, future}, [ih, ia, ic, stride](Tape& t, int self) {
        const Tensor& g = t.grad(self);
        const Tensor& hv = t.value(ih);
        const Tensor& a = t.value(ia);
        const Tensor& c = t.value(ic);
        const Eigen::Index frames = hv.rows();
        const bool need_h = t.requires_grad(ih);
        const bool need_a = t.requires_grad(ia);
        const bool need_c = t.requires_grad(ic);
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
          const Eigen::Index off = i * stride;
          if (off >= frames) break;
          const Eigen::Index n = frames - off;
          if (need_h) {
            t.grad_buffer(ih).topRows(n).array() +=
                g.bottomRows(n).array().rowwise() * a.row(i).array();
          }
          if (need_a) {
            t.grad_buffer(ia).row(i) +=
                g.bottomRows(n).cwiseProduct(hv.topRows(n)).colwise().sum();
          }
        }
        for (Eigen::Index j = 0; j < c.rows(); ++j) {
          const Eigen::Index off = j * stride;
          if (off >= frames) break;
          const Eigen::Index n = frames - off;
          if (need_h) {
            t.grad_buffer(ih).bottomRows(n).array() +=
                g.topRows(n).array().rowwise() * c.row(j).array();
          }
          if (need_c) {
            t.grad_buffer(ic).row(j) +=
                g.topRows(n).cwiseProduct(hv.bottomRows(n)).colwise().sum();
          }
        }
      });
}

Var fsmn_layer(Var h, Var past, Var future, Var w, Var w_mem, Var bias,
               int stride, Activation activation) {
  if (w.cols() != h.cols() || w_mem.cols() != h.cols() ||
      w_mem.rows() != w.rows()) {
    throw DimensionError("fsmn_layer: weights do not match input width " +
                         std::to_string(h.cols()));
  }
  Var mem = fsmn_memory(h, past, future, stride);
  Var pre = add(linear(h, w, bias), matmul_nt(mem, w_mem));
  return activation == Activation::kRelu ? relu(pre) : pre;
}

Tensor fsmn_layer_forward(const Tensor& h, const FsmnLayerParams& params) {
  Tape tape;
  Var out = fsmn_layer(tape.constant(h), tape.constant(params.past),
                       tape.constant(params.future), tape.constant(params.w),
                       tape.constant(params.w_mem), tape.constant(params.bias),
                       params.stride, params.activation);
  return out.value();
}

std::pair<long, long> receptive_field(const std::vector<FsmnSpec>& layers) {
  long left = 0, right = 0;
  for (const FsmnSpec& s : layers) {
    left += static_cast<long>(s.left_order) * s.stride;
    right += static_cast<long>(s.right_order) * s.stride;
  }
  return {left, right};
}

Var multi_head_attention(Var q, Var k, Var v, int heads,
                         Eigen::Index window) {
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  if (qv.rows() != kv.rows() || kv.rows() != vv.rows() ||
      qv.cols() != kv.cols() || kv.cols() != vv.cols()) {
    throw DimensionError("multi_head_attention: q/k/v shapes disagree");
  }
  if (heads < 1 || qv.cols() % heads != 0) {
    throw DimensionError("multi_head_attention: width " +
                         std::to_string(qv.cols()) +
                         " not divisible into heads");
  }
  const Eigen::Index frames = qv.rows();
  const Eigen::Index dh = qv.cols() / heads;
  const Eigen::Index span = window > 0 ? std::min(window, frames) : frames;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // probs[block * heads + h]
  std::vector<Tensor> probs;
  Tensor out(frames, qv.cols());
  for (Eigen::Index t0 = 0; t0 < frames; t0 += span) {
    const Eigen::Index len = std::min(span, frames - t0);
    for (int h = 0; h < heads; ++h) {
      const Tensor qh = qv.block(t0, h * dh, len, dh);
      const Tensor kh = kv.block(t0, h * dh, len, dh);
      const Tensor vh = vv.block(t0, h * dh, len, dh);
      Tensor s(len, len);
      s.noalias() = scale * qh * kh.transpose();
      probs.push_back(send::softmax_rows(s));
      Tensor o(len, dh);
      o.noalias() = probs.back() * vh;
      out.block(t0, h * dh, len, dh) = o;
    }
  }
  const int iq = q.id(), ik = k.id(), iv = v.id();
  return q.tape()->record(
      std::move(out), {q, k, v},
      [iq, ik, iv, heads, dh, span, scale, probs = std::move(probs)](
          Tape& t, int self) {
        const Tensor& g = t.grad(self);
        const Tensor& qv = t.value(iq);
        const Tensor& kv = t.value(ik);
        const Tensor& vv = t.value(iv);
        const Eigen::Index frames = qv.rows();
        const bool need_q = t.requires_grad(iq);
        const bool need_k = t.requires_grad(ik);
        const bool need_v = t.requires_grad(iv);
        std::size_t idx = 0;
        for (Eigen::Index t0 = 0; t0 < frames; t0 += span) {
          const Eigen::Index len = std::min(span, frames - t0);
          for (int h = 0; h < heads; ++h, ++idx) {
            const Tensor& p = probs[idx];
            const Tensor gh = g.block(t0, h * dh, len, dh);
            if (need_v) {
              Tensor dv(len, dh);
              dv.noalias() = p.transpose() * gh;
              t.grad_buffer(iv).block(t0, h * dh, len, dh) += dv;
            }
            if (!need_q && !need_k) continue;
            const Tensor vh = vv.block(t0, h * dh, len, dh);
            Tensor ds(len, len);
            ds.noalias() = gh * vh.transpose();
            const Eigen::VectorXd dot = ds.cwiseProduct(p).rowwise().sum();
            ds.colwise() -= dot;
            ds = ds.cwiseProduct(p) * scale;
            if (need_q) {
              const Tensor kh = kv.block(t0, h * dh, len, dh);
              Tensor dq(len, dh);
              dq.noalias() = ds * kh;
              t.grad_buffer(iq).block(t0, h * dh, len, dh) += dq;
            }
            if (need_k) {
              const Tensor qh = qv.block(t0, h * dh, len, dh);
              Tensor dk(len, dh);
              dk.noalias() = ds.transpose() * qh;
              t.grad_buffer(ik).block(t0, h * dh, len, dh) += dk;
            }
          }
        }
      });
}

Tensor position_encoding(Eigen::Index frames, Eigen::Index dim) {
  Tensor pe(frames, dim);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) /
                                static_cast<double>(dim));
      const double angle = static_cast<double>(t) * rate;
      pe(t, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

ParamView::ParamView(const ParamStore& store, std::span<const Var> leaves)
    : store_(&store), leaves_(leaves) {
  if (leaves.size() != store.size()) {
    throw DimensionError("ParamView: leaf count differs from store");
  }
}

Var ParamView::operator[](const std::string& name) const {
  const auto& names = store_->names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return leaves_[i];
  }
  throw IndexError("model parameter '" + name + "' missing");
}

ParamStore init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Init init(seed);
  ParamStore ps;
  int in = config.feat_dim;
  for (std::size_t i = 0; i < config.speech_layers.size(); ++i) {
    add_fsmn(ps, init, layer_name("speech_enc", i), in, config.hidden,
             config.speech_layers[i]);
    in = config.hidden;
  }
  in = config.embed_dim;
  for (int i = 0; i < config.speaker_layers; ++i) {
    const bool last = i + 1 == config.speaker_layers;
    const std::string name = layer_name("spk_enc", static_cast<std::size_t>(i));
    ps.add(name + ".w", init.normal(config.hidden, in,
                                    std::sqrt((last ? 1.0 : 2.0) / in)));
    ps.add(name + ".b", Tensor::Zero(1, config.hidden));
    in = config.hidden;
  }
  if (config.cd == CdKind::kAttention) {
    const int d = config.cd_dim;
    ps.add("cd.fuse.w",
           init.normal(d, 2 * config.hidden, std::sqrt(1.0 / (2 * config.hidden))));
    ps.add("cd.fuse.b", Tensor::Zero(1, d));
    for (int b = 0; b < config.cd_layers; ++b) {
      const std::string name = "cd.block" + std::to_string(b);
      ps.add(name + ".ln1.g", Tensor::Ones(1, d));
      ps.add(name + ".ln1.b", Tensor::Zero(1, d));
      for (const char* w : {".attn.wq", ".attn.wk", ".attn.wv", ".attn.wo"}) {
        ps.add(name + w, init.normal(d, d, std::sqrt(1.0 / d)));
      }
      ps.add(name + ".ln2.g", Tensor::Ones(1, d));
      ps.add(name + ".ln2.b", Tensor::Zero(1, d));
      ps.add(name + ".ffn.w1", init.normal(config.cd_ffn, d, std::sqrt(2.0 / d)));
      ps.add(name + ".ffn.b1", Tensor::Zero(1, config.cd_ffn));
      ps.add(name + ".ffn.w2",
             init.normal(d, config.cd_ffn, std::sqrt(1.0 / config.cd_ffn)));
      ps.add(name + ".ffn.b2", Tensor::Zero(1, d));
    }
    ps.add("cd.ln_f.g", Tensor::Ones(1, d));
    ps.add("cd.ln_f.b", Tensor::Zero(1, d));
    ps.add("cd.out.w", init.normal(1, d, std::sqrt(1.0 / d)));
    ps.add("cd.out.b", Tensor::Zero(1, 1));
  }
  in = config.score_width();
  for (std::size_t i = 0; i < config.postnet_layers.size(); ++i) {
    add_fsmn(ps, init, layer_name("post_net", i), in, config.postnet_hidden,
             config.postnet_layers[i]);
    in = config.postnet_hidden;
  }
  ps.add("head.w", init.normal(config.head_width(), in, 0.01));
  ps.add("head.b", Tensor::Zero(1, config.head_width()));
  return ps;
}

namespace {

Var fsmn_stack_forward(const ParamView& p, const char* block,
                       const std::vector<FsmnSpec>& layers, Var x) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string n = layer_name(block, i);
    x = fsmn_layer(x, p[n + ".past"], p[n + ".future"], p[n + ".w"],
                   p[n + ".w_mem"], p[n + ".b"], layers[i].stride,
                   Activation::kRelu);
  }
  return x;
}

}  // namespace

Var speaker_encoder(const ModelConfig& config, const ParamView& p,
                    Var embeddings) {
  if (embeddings.cols() != config.embed_dim) {
    throw DimensionError("speaker_encoder: embeddings have width " +
                         std::to_string(embeddings.cols()) + ", expected " +
                         std::to_string(config.embed_dim));
  }
  Var x = embeddings;
  for (int i = 0; i < config.speaker_layers; ++i) {
    const std::string n = layer_name("spk_enc", static_cast<std::size_t>(i));
    x = linear(x, p[n + ".w"], p[n + ".b"]);
    if (i + 1 < config.speaker_layers) x = relu(x);
  }
  return x;
}

Var speech_encoder(const ModelConfig& config, const ParamView& p,
                   Var features) {
  if (features.cols() != config.feat_dim) {
    throw DimensionError("speech_encoder: features have width " +
                         std::to_string(features.cols()) + ", expected " +
                         std::to_string(config.feat_dim));
  }
  return fsmn_stack_forward(p, "speech_enc", config.speech_layers, features);
}

Var ci_score(Var encoded_speech, Var encoded_speakers) {
  if (encoded_speech.cols() != encoded_speakers.cols()) {
    throw DimensionError("ci_score: speech width " +
                         std::to_string(encoded_speech.cols()) +
                         " vs speaker width " +
                         std::to_string(encoded_speakers.cols()));
  }
  return matmul_nt(encoded_speech, encoded_speakers);
}

Var cd_score(const ModelConfig& config, const ParamView& p,
             Var encoded_speech, Var encoded_speakers) {
  if (encoded_speech.cols() != config.hidden ||
      encoded_speakers.cols() != config.hidden) {
    throw DimensionError("cd_score: inputs must have width " +
                         std::to_string(config.hidden));
  }
  Tape& tape = *encoded_speech.tape();
  const Eigen::Index frames = encoded_speech.rows();
  Var fuse_w = p["cd.fuse.w"];
  // P * [h; e] = P_h h + P_e e, with the speech half shared by all speakers.
  Var speech_part =
      matmul_nt(encoded_speech, slice_cols(fuse_w, 0, config.hidden));
  Var speaker_part = linear(encoded_speakers,
                            slice_cols(fuse_w, config.hidden, config.hidden),
                            p["cd.fuse.b"]);
  Var pe = tape.constant(position_encoding(frames, config.cd_dim));
  Var base = add(speech_part, pe);

  std::vector<Var> columns;
  for (Eigen::Index n = 0; n < encoded_speakers.rows(); ++n) {
    Var x = add_row(base, slice_rows(speaker_part, n, 1));
    for (int b = 0; b < config.cd_layers; ++b) {
      const std::string name = "cd.block" + std::to_string(b);
      Var a = layer_norm(x, p[name + ".ln1.g"], p[name + ".ln1.b"]);
      Var attn = multi_head_attention(matmul_nt(a, p[name + ".attn.wq"]),
                                      matmul_nt(a, p[name + ".attn.wk"]),
                                      matmul_nt(a, p[name + ".attn.wv"]),
                                      config.cd_heads,
                                      config.attention_context);
      x = add(x, matmul_nt(attn, p[name + ".attn.wo"]));
      Var f = layer_norm(x, p[name + ".ln2.g"], p[name + ".ln2.b"]);
      f = relu(linear(f, p[name + ".ffn.w1"], p[name + ".ffn.b1"]));
      x = add(x, linear(f, p[name + ".ffn.w2"], p[name + ".ffn.b2"]));
    }
    Var z = layer_norm(x, p["cd.ln_f.g"], p["cd.ln_f.b"]);
    columns.push_back(linear(z, p["cd.out.w"], p["cd.out.b"]));
  }
  return concat_cols(columns);
}

ForwardResult forward(const ModelConfig& config, const ParamView& p,
                      Var features, Var embeddings) {
  config.validate();
  if (config.head == HeadKind::kPse &&
      config.head_width() != num_classes(config.speakers, config.max_overlap)) {
    throw ConfigError("forward: pse head width does not match class count");
  }
  if (embeddings.rows() != config.speakers) {
    throw DimensionError("forward: " + std::to_string(embeddings.rows()) +
                         " speaker embeddings, model expects " +
                         std::to_string(config.speakers));
  }
  Var h = speech_encoder(config, p, features);
  Var e = speaker_encoder(config, p, embeddings);

  ForwardResult out;
  std::vector<Var> scores;
  if (config.use_ci) {
    out.ci = ci_score(h, e);
    scores.push_back(out.ci);
  }
  if (config.cd == CdKind::kAttention) {
    out.cd = cd_score(config, p, h, e);
    scores.push_back(out.cd);
  }
  Var s = scores.size() == 1 ? scores[0] : concat_cols(scores);
  Var post = fsmn_stack_forward(p, "post_net", config.postnet_layers, s);
  out.logits = linear(post, p["head.w"], p["head.b"]);
  return out;
}

Tensor infer_logits(const ModelConfig& config, const ParamStore& params,
                    const Tensor& features, const Tensor& embeddings) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    leaves.push_back(tape.constant(params.value(i)));
  }
  ParamView view(params, leaves);
  ForwardResult r = forward(config, view, tape.constant(features),
                            tape.constant(embeddings));
  return r.logits.value();
}

long param_count(const ModelConfig& c) {
  c.validate();
  long n = 0;
  int in = c.feat_dim;
  for (const FsmnSpec& s : c.speech_layers) {
    n += fsmn_param_count(in, c.hidden, s);
    in = c.hidden;
  }
  in = c.embed_dim;
  for (int i = 0; i < c.speaker_layers; ++i) {
    n += static_cast<long>(in) * c.hidden + c.hidden;
    in = c.hidden;
  }
  if (c.cd == CdKind::kAttention) {
    const long d = c.cd_dim;
    const long f = c.cd_ffn;
    n += d * 2 * c.hidden + d;
    n += c.cd_layers * (4 * d + 4 * d * d + f * d + f + d * f + d);
    n += 2 * d + d + 1;
  }
  in = c.score_width();
  for (const FsmnSpec& s : c.postnet_layers) {
    n += fsmn_param_count(in, c.postnet_hidden, s);
    in = c.postnet_hidden;
  }
  n += static_cast<long>(in) * c.head_width() + c.head_width();
  return n;
}

double flops_count(const ModelConfig& c, long frames) {
  c.validate();
  // Multiply-accumulates per frame.
  double mac = 0.0;
  int in = c.feat_dim;
  for (const FsmnSpec& s : c.speech_layers) {
    mac += static_cast<double>(s.left_order + s.right_order + 2) * in;
    mac += 2.0 * c.hidden * in;
    in = c.hidden;
  }
  // Speaker encoder runs once per window of attention_context frames.
  double per_window = 0.0;
  in = c.embed_dim;
  for (int i = 0; i < c.speaker_layers; ++i) {
    per_window += static_cast<double>(c.speakers) * in * c.hidden;
    in = c.hidden;
  }
  if (c.use_ci) mac += static_cast<double>(c.speakers) * c.hidden;
  if (c.cd == CdKind::kAttention) {
    const double d = c.cd_dim;
    const double ctx = c.attention_context;
    mac += d * c.hidden;  // shared speech half of the fusion projection
    per_window += static_cast<double>(c.speakers) * d * c.hidden;
    const double per_block = 4.0 * d * d + 2.0 * d * c.cd_ffn + 2.0 * ctx * d;
    mac += c.speakers * (c.cd_layers * per_block + d);
  }
  in = c.score_width();
  for (const FsmnSpec& s : c.postnet_layers) {
    mac += static_cast<double>(s.left_order + s.right_order + 2) * in;
    mac += 2.0 * c.postnet_hidden * in;
    in = c.postnet_hidden;
  }
  mac += static_cast<double>(in) * c.head_width();
  mac += per_window / c.attention_context;
  return 2.0 * mac * static_cast<double>(frames);
}

}  // namespace send
