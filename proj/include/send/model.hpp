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

#ifndef SEND_MODEL_HPP_
#define SEND_MODEL_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "send/keyvalue.hpp"
#include "send/params.hpp"

namespace send {

enum class Activation { kIdentity, kRelu };
enum class CdKind { kNone, kAttention };
enum class HeadKind { kPse, kMultilabel };

/// Memory orders and stride of one FSMN layer.
struct FsmnSpec {
  int left_order = 1;
  int right_order = 1;
  int stride = 1;
};

/// Weights of a single FSMN layer. Row i of `past` is the tap applied to
/// h[t - i * stride]; row j of `future` the tap applied to h[t + j * stride].
/// Both row 0s multiply h[t].
struct FsmnLayerParams {
  Tensor past;     // (left_order + 1) x in
  Tensor future;   // (right_order + 1) x in
  Tensor w;        // out x in
  Tensor w_mem;    // out x in
  Tensor bias;     // 1 x out
  int stride = 1;
  Activation activation = Activation::kRelu;
};

struct ModelConfig {
  int feat_dim = 16;
  int embed_dim = 16;
  int hidden = 64;
  std::vector<FsmnSpec> speech_layers;
  int speaker_layers = 2;
  bool use_ci = true;
  CdKind cd = CdKind::kAttention;
  int cd_layers = 2;
  int cd_heads = 2;
  int cd_dim = 32;
  int cd_ffn = 64;
  int postnet_hidden = 32;
  std::vector<FsmnSpec> postnet_layers;
  HeadKind head = HeadKind::kPse;
  int speakers = 4;
  int max_overlap = 4;
  // Attention span assumed by flops_count (frames per inference window).
  int attention_context = 400;

  int head_width() const;
  int score_width() const;
  void validate() const;

  static ModelConfig preset(const std::string& name);
  static ModelConfig from(const KeyValues& kv);
  KeyValues to_key_values() const;
};

// FSMN memory block: sum_i past[i] * h[t - i*d] + sum_j future[j] * h[t + j*d],
// taps outside [0, T) read zero.
Var fsmn_memory(Var h, Var past, Var future, int stride);

Var fsmn_layer(Var h, Var past, Var future, Var w, Var w_mem, Var bias,
               int stride, Activation activation);

/// Plain evaluation of one FSMN layer on a T x in input.
Tensor fsmn_layer_forward(const Tensor& h, const FsmnLayerParams& params);

/// (left, right) frames of context seen by the last layer of a stack.
std::pair<long, long> receptive_field(const std::vector<FsmnSpec>& layers);

/// Scaled dot-product self-attention with `heads` heads. Frames attend
/// within consecutive blocks of `window` frames; window <= 0 attends over
/// the whole sequence.
Var multi_head_attention(Var q, Var k, Var v, int heads,
                         Eigen::Index window = 0);

/// Sinusoidal position table, frames x dim.
Tensor position_encoding(Eigen::Index frames, Eigen::Index dim);

/// Named view over leaves bound from a ParamStore.
class ParamView {
 public:
  ParamView(const ParamStore& store, std::span<const Var> leaves);
  Var operator[](const std::string& name) const;

 private:
  const ParamStore* store_;
  std::span<const Var> leaves_;
};

ParamStore init_params(const ModelConfig& config, std::uint64_t seed);

Var speaker_encoder(const ModelConfig& config, const ParamView& p,
                    Var embeddings);
Var speech_encoder(const ModelConfig& config, const ParamView& p,
                   Var features);
/// S[t, n] = <h_t, e_n>.
Var ci_score(Var encoded_speech, Var encoded_speakers);
Var cd_score(const ModelConfig& config, const ParamView& p,
             Var encoded_speech, Var encoded_speakers);

struct ForwardResult {
  Var logits;      // T x head_width
  Var ci;          // invalid when disabled
  Var cd;          // invalid when disabled
};

ForwardResult forward(const ModelConfig& config, const ParamView& p,
                      Var features, Var embeddings);

/// Forward pass without gradient tracking.
Tensor infer_logits(const ModelConfig& config, const ParamStore& params,
                    const Tensor& features, const Tensor& embeddings);

long param_count(const ModelConfig& config);
/// Floating-point operations (2 per multiply-accumulate) for `frames`
/// input frames. Per-window work (speaker encoder, attention over
/// attention_context keys) is amortised per frame so the count is linear
/// in `frames`.
double flops_count(const ModelConfig& config, long frames);

}  // namespace send

#endif  // SEND_MODEL_HPP_
