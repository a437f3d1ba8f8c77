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

#ifndef SEND_TRAINER_HPP_
#define SEND_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "send/datasim.hpp"
#include "send/keyvalue.hpp"
#include "send/metrics.hpp"
#include "send/model.hpp"
#include "send/postproc.hpp"

namespace send {

enum class TrainStage { kPretrain, kFinetune };
enum class ScheduleKind { kWarmup, kConstant };
enum class LossKind { kCePse, kBceMultilabel };

struct TrainConfig {
  TrainStage stage = TrainStage::kPretrain;
  long steps = 2000;
  int batch = 8;
  ScheduleKind schedule = ScheduleKind::kWarmup;
  double lr_base = 1.0;
  long warmup = 10000;
  double lr_const = 1e-5;
  long eval_every = 200;
  int keep_best = 3;
  std::uint64_t seed = 1;
  LossKind loss = LossKind::kCePse;
  double clip = 5.0;        // global gradient norm; <= 0 disables
  int train_chunks = 0;     // 0 = whole split
  int eval_chunks = 0;      // 0 = whole split
  int median_window = 0;    // 0 = scaled default for the frame rate
  std::string init;         // checkpoint to start from; empty = random

  /// Unknown keys are rejected. `stage=finetune` switches the default
  /// schedule to constant.
  static TrainConfig from(const KeyValues& kv);
  KeyValues to_key_values() const;
  void validate() const;
};

/// base * min(step^-0.5, step * warmup^-1.5), or the constant rate.
double lr_schedule(long step, const TrainConfig& config);

struct TrainLogEntry {
  long step = 0;
  double lr = 0.0;
  double loss = 0.0;
  double grad_norm = 0.0;
};

struct EvalLogEntry {
  long step = 0;
  double loss = 0.0;
  DerReport report;
};

struct TrainLog {
  std::vector<TrainLogEntry> steps;
  std::vector<EvalLogEntry> evals;
};

/// One chunk ready for the network.
struct Example {
  std::string name;
  Tensor features;            // T x F
  Tensor embeddings;          // N x D
  LabelMatrix labels;         // T x N
  std::vector<int> classes;   // PSE targets (keep-lowest for overflow frames)
};

std::vector<Example> make_examples(const DataSplit& split,
                                   const ModelConfig& config);

/// Mean per-frame loss of one example on `tape`.
Var example_loss(const ModelConfig& config, const ParamView& params,
                 Tape& tape, const Example& example, LossKind loss);

/// Network output turned into decisions: PSE argmax for the pse head,
/// sigmoid >= 0.5 for the multilabel head.
Decoded decode_logits(const ModelConfig& config, const Tensor& logits,
                      const DecodeOptions& options);

struct EvalResult {
  double loss = 0.0;  // mean over examples
  DerReport report;   // pooled over examples, identity mapping
};

EvalResult evaluate(const ModelConfig& config, const ParamStore& params,
                    const std::vector<Example>& examples, LossKind loss,
                    const DecodeOptions& options, int workers = 1);

struct TrainResult {
  TrainLog log;
  std::vector<std::filesystem::path> best;  // ascending eval loss
  std::filesystem::path last;
  std::filesystem::path averaged;
  ParamStore averaged_params;
};

/// Trains on `<data_root>/train`, evaluates on `<data_root>/eval`, and
/// writes into `out_dir`:
///
///   model.cfg, train.cfg        configs used
///   train.log, eval.log         tab-separated logs
///   ckpt_<step>.ckpt            the keep_best checkpoints by eval loss
///   last.ckpt, avg.ckpt         final and averaged parameters
///
/// `progress`, when given, receives one line per evaluation.
TrainResult train(const ModelConfig& model, const std::filesystem::path& data_root,
                  const TrainConfig& config, const std::filesystem::path& out_dir,
                  std::ostream* progress = nullptr);

/// Elementwise mean; all checkpoints must share names and shapes.
ParamStore average_checkpoints(const std::vector<std::filesystem::path>& paths);
ParamStore average_params(const std::vector<ParamStore>& stores);

void write_train_log(std::ostream& out, const TrainLog& log);
void write_eval_log(std::ostream& out, const TrainLog& log);
std::vector<TrainLogEntry> read_train_log(std::istream& in);

/// Exponential moving average, s_0 = x_0, s_t = a s_{t-1} + (1 - a) x_t.
std::vector<double> smooth_losses(const std::vector<TrainLogEntry>& steps,
                                  double alpha);

}  // namespace send

#endif  // SEND_TRAINER_HPP_
