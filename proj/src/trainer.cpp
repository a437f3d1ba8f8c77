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

#include "send/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "send/autograd.hpp"
#include "send/checkpoint.hpp"
#include "send/optim.hpp"
#include "send/parallel.hpp"
#include "send/pse.hpp"

namespace send {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSaltInit = 0x1417;
constexpr std::uint64_t kSaltShuffle = 0x5f1e;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

const char* stage_name(TrainStage s) {
  return s == TrainStage::kPretrain ? "pretrain" : "finetune";
}
const char* schedule_name(ScheduleKind s) {
  return s == ScheduleKind::kWarmup ? "warmup" : "constant";
}
const char* loss_name(LossKind l) {
  return l == LossKind::kCePse ? "ce-pse" : "bce-multilabel";
}

void check_loss_head(const ModelConfig& model, LossKind loss) {
  const bool pse = model.head == HeadKind::kPse;
  if (pse != (loss == LossKind::kCePse)) {
    throw ConfigError(std::string("loss ") + loss_name(loss) +
                      " does not fit the " + (pse ? "pse" : "multilabel") +
                      " head");
  }
}

void check_data_model(const CorpusConfig& data, const ModelConfig& model) {
  if (data.speakers != model.speakers) {
    throw ConfigError("dataset has N=" + std::to_string(data.speakers) +
                      ", model expects " + std::to_string(model.speakers));
  }
  if (data.feat_dim != model.feat_dim) {
    throw ConfigError("dataset has F=" + std::to_string(data.feat_dim) +
                      ", model expects " + std::to_string(model.feat_dim));
  }
  if (data.feat_dim != model.embed_dim) {
    throw ConfigError("dataset embeddings have D=" +
                      std::to_string(data.feat_dim) + ", model expects " +
                      std::to_string(model.embed_dim));
  }
  if (model.head == HeadKind::kPse && data.max_overlap != model.max_overlap) {
    throw ConfigError("dataset has K=" + std::to_string(data.max_overlap) +
                      ", model expects " + std::to_string(model.max_overlap));
  }
}

}  // namespace

TrainConfig TrainConfig::from(const KeyValues& kv) {
  kv.require_known({"stage", "steps", "batch", "schedule", "lr_base", "warmup",
                    "lr_const", "eval_every", "keep_best", "seed", "loss",
                    "clip", "train_chunks", "eval_chunks", "median_window",
                    "init"},
                   "train config");
  TrainConfig c;
  const std::string stage = kv.get_string("stage", "pretrain");
  if (stage == "pretrain") {
    c.stage = TrainStage::kPretrain;
  } else if (stage == "finetune") {
    c.stage = TrainStage::kFinetune;
    c.schedule = ScheduleKind::kConstant;
  } else {
    throw ConfigError("train config: stage must be pretrain or finetune");
  }
  c.steps = kv.get_long("steps", c.steps);
  c.batch = static_cast<int>(kv.get_long("batch", c.batch));
  const std::string sched = kv.get_string("schedule", schedule_name(c.schedule));
  if (sched == "warmup") {
    c.schedule = ScheduleKind::kWarmup;
  } else if (sched == "constant") {
    c.schedule = ScheduleKind::kConstant;
  } else {
    throw ConfigError("train config: schedule must be warmup or constant");
  }
  c.lr_base = kv.get_double("lr_base", c.lr_base);
  c.warmup = kv.get_long("warmup", c.warmup);
  c.lr_const = kv.get_double("lr_const", c.lr_const);
  c.eval_every = kv.get_long("eval_every", c.eval_every);
  c.keep_best = static_cast<int>(kv.get_long("keep_best", c.keep_best));
  const long seed = kv.get_long("seed", static_cast<long>(c.seed));
  if (seed < 0) throw ConfigError("train config: seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  const std::string loss = kv.get_string("loss", loss_name(c.loss));
  if (loss == "ce-pse") {
    c.loss = LossKind::kCePse;
  } else if (loss == "bce-multilabel") {
    c.loss = LossKind::kBceMultilabel;
  } else {
    throw ConfigError("train config: loss must be ce-pse or bce-multilabel");
  }
  c.clip = kv.get_double("clip", c.clip);
  c.train_chunks = static_cast<int>(kv.get_long("train_chunks", 0));
  c.eval_chunks = static_cast<int>(kv.get_long("eval_chunks", 0));
  c.median_window = static_cast<int>(kv.get_long("median_window", 0));
  c.init = kv.get_string("init", "");
  c.validate();
  return c;
}

KeyValues TrainConfig::to_key_values() const {
  KeyValues kv;
  kv.set("stage", stage_name(stage));
  kv.set("steps", std::to_string(steps));
  kv.set("batch", std::to_string(batch));
  kv.set("schedule", schedule_name(schedule));
  kv.set("lr_base", format_double(lr_base));
  kv.set("warmup", std::to_string(warmup));
  kv.set("lr_const", format_double(lr_const));
  kv.set("eval_every", std::to_string(eval_every));
  kv.set("keep_best", std::to_string(keep_best));
  kv.set("seed", std::to_string(seed));
  kv.set("loss", loss_name(loss));
  kv.set("clip", format_double(clip));
  kv.set("train_chunks", std::to_string(train_chunks));
  kv.set("eval_chunks", std::to_string(eval_chunks));
  kv.set("median_window", std::to_string(median_window));
  if (!init.empty()) kv.set("init", init);
  return kv;
}

void TrainConfig::validate() const {
  if (steps < 1) throw ConfigError("train config: steps must be positive");
  if (batch < 1) throw ConfigError("train config: batch must be positive");
  if (keep_best < 1) throw ConfigError("train config: keep_best must be >= 1");
  if (eval_every < 1) {
    throw ConfigError("train config: eval_every must be positive");
  }
  if (schedule == ScheduleKind::kWarmup && (warmup < 1 || !(lr_base > 0.0))) {
    throw ConfigError("train config: warm-up needs warmup >= 1, lr_base > 0");
  }
  if (schedule == ScheduleKind::kConstant && !(lr_const > 0.0)) {
    throw ConfigError("train config: lr_const must be positive");
  }
  if (train_chunks < 0 || eval_chunks < 0) {
    throw ConfigError("train config: chunk limits must be >= 0");
  }
  if (median_window < 0 || (median_window > 0 && median_window % 2 == 0)) {
    throw ConfigError("train config: median_window must be odd (or 0)");
  }
}

double lr_schedule(long step, const TrainConfig& config) {
  if (step < 1) {
    throw DomainError("lr_schedule: step must be >= 1, got " +
                      std::to_string(step));
  }
  if (config.schedule == ScheduleKind::kConstant) return config.lr_const;
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(config.warmup);
  return config.lr_base * std::min(1.0 / std::sqrt(s), s * std::pow(w, -1.5));
}

std::vector<Example> make_examples(const DataSplit& split,
                                   const ModelConfig& config) {
  std::vector<Example> out;
  out.reserve(split.chunks.size());
  const bool pse = config.head == HeadKind::kPse;
  const PseCodec codec(config.speakers, config.max_overlap);
  for (const Chunk& c : split.chunks) {
    if (c.labels.cols() != config.speakers) {
      throw ConfigError(split.name + "/" + c.name + ": " +
                        std::to_string(c.labels.cols()) +
                        " label columns, model expects " +
                        std::to_string(config.speakers));
    }
    Example e;
    e.name = split.name + "/" + c.name;
    e.features = c.features;
    e.embeddings = split.chunk_embeddings(c);
    e.labels = c.labels;
    if (pse) e.classes = codec.encode_sequence(c.labels, OverflowPolicy::kKeepLowest);
    out.push_back(std::move(e));
  }
  return out;
}

Var example_loss(const ModelConfig& config, const ParamView& params,
                 Tape& tape, const Example& example, LossKind loss) {
  const ForwardResult r = forward(config, params, tape.constant(example.features),
                                  tape.constant(example.embeddings));
  if (loss == LossKind::kCePse) return cross_entropy(r.logits, example.classes);
  return binary_cross_entropy(r.logits, example.labels);
}

Decoded decode_logits(const ModelConfig& config, const Tensor& logits,
                      const DecodeOptions& options) {
  if (config.head == HeadKind::kPse) {
    return decode_pipeline(logits, PseCodec(config.speakers, config.max_overlap),
                           options);
  }
  return decode_multilabel(sigmoid(logits), 0.5, options);
}

EvalResult evaluate(const ModelConfig& config, const ParamStore& params,
                    const std::vector<Example>& examples, LossKind loss,
                    const DecodeOptions& options, int workers) {
  check_loss_head(config, loss);
  std::vector<double> losses(examples.size());
  std::vector<DerReport> reports(examples.size());
  parallel_for(examples.size(), workers, [&](std::size_t i) {
    const Example& ex = examples[i];
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(params.size());
    for (std::size_t p = 0; p < params.size(); ++p) {
      leaves.push_back(tape.constant(params.value(p)));
    }
    const ParamView view(params, leaves);
    const ForwardResult r = forward(config, view, tape.constant(ex.features),
                                    tape.constant(ex.embeddings));
    const Var l = loss == LossKind::kCePse
                      ? cross_entropy(r.logits, ex.classes)
                      : binary_cross_entropy(r.logits, ex.labels);
    losses[i] = l.value()(0, 0);
    DecodeOptions opt = options;
    opt.recording = ex.name;
    reports[i] = der_frames(ex.labels, decode_logits(config, r.logits.value(), opt).labels);
  });
  EvalResult out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    out.loss += losses[i];
    out.report += reports[i];
  }
  if (!examples.empty()) out.loss /= static_cast<double>(examples.size());
  return out;
}

ParamStore average_params(const std::vector<ParamStore>& stores) {
  if (stores.empty()) throw CheckpointError("average: no checkpoints given");
  for (std::size_t i = 1; i < stores.size(); ++i) {
    if (!stores[i].same_layout(stores.front())) {
      throw CheckpointError("average: checkpoint " + std::to_string(i) +
                            " has a different parameter manifest");
    }
  }
  // Each element is summed in sorted order, so the result does not depend
  // on the order of `stores`.
  ParamStore avg = stores.front();
  const double k = static_cast<double>(stores.size());
  std::vector<double> vals(stores.size());
  for (std::size_t p = 0; p < avg.size(); ++p) {
    Tensor& out = avg.value(p);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      for (std::size_t s = 0; s < stores.size(); ++s) {
        vals[s] = stores[s].value(p).data()[i];
      }
      std::sort(vals.begin(), vals.end());
      double acc = 0.0;
      for (double v : vals) acc += v;
      out.data()[i] = acc / k;
    }
  }
  return avg;
}

ParamStore average_checkpoints(const std::vector<fs::path>& paths) {
  std::vector<ParamStore> stores;
  for (const fs::path& p : paths) stores.push_back(load_checkpoint(p));
  try {
    return average_params(stores);
  } catch (const CheckpointError& e) {
    throw CheckpointError(std::string(e.what()) + " (" +
                          paths.front().string() + ")");
  }
}

void write_train_log(std::ostream& out, const TrainLog& log) {
  out << "step\tlr\tloss\tgrad_norm\n";
  for (const TrainLogEntry& e : log.steps) {
    out << e.step << '\t' << fmt(e.lr) << '\t' << fmt(e.loss) << '\t'
        << fmt(e.grad_norm) << '\n';
  }
}

void write_eval_log(std::ostream& out, const TrainLog& log) {
  out << "step\tloss\t" << DerReport::tsv_header() << '\n';
  for (const EvalLogEntry& e : log.evals) {
    out << e.step << '\t' << fmt(e.loss) << '\t' << e.report.tsv() << '\n';
  }
}

std::vector<TrainLogEntry> read_train_log(std::istream& in) {
  std::vector<TrainLogEntry> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    std::istringstream fields(line);
    TrainLogEntry e;
    if (!(fields >> e.step >> e.lr >> e.loss >> e.grad_norm)) {
      throw ParseError("train log line " + std::to_string(lineno) +
                           ": expected step, lr, loss, grad_norm",
                       lineno);
    }
    out.push_back(e);
  }
  return out;
}

std::vector<double> smooth_losses(const std::vector<TrainLogEntry>& steps,
                                  double alpha) {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const TrainLogEntry& e : steps) {
    out.push_back(out.empty() ? e.loss
                              : alpha * out.back() + (1.0 - alpha) * e.loss);
  }
  return out;
}

TrainResult train(const ModelConfig& model, const fs::path& data_root,
                  const TrainConfig& config, const fs::path& out_dir,
                  std::ostream* progress) {
  model.validate();
  config.validate();
  check_loss_head(model, config.loss);
  const CorpusManifest manifest = read_manifest(data_root);
  check_data_model(manifest.config, model);

  const std::vector<Example> train_set =
      make_examples(load_split(data_root, "train", config.train_chunks), model);
  const std::vector<Example> eval_set =
      make_examples(load_split(data_root, "eval", config.eval_chunks), model);
  if (train_set.empty()) throw InputError("training split is empty");

  DecodeOptions decode;
  decode.frame_rate = manifest.config.frame_rate;
  decode.median_window = config.median_window > 0
                             ? config.median_window
                             : scaled_median_window(decode.frame_rate);

  ParamStore params = init_params(model, derive_seed(config.seed, {kSaltInit}));
  if (!config.init.empty()) {
    ParamStore start = load_checkpoint(config.init);
    if (!start.same_layout(params)) {
      throw CheckpointError("init checkpoint '" + config.init +
                            "' does not match the model layout");
    }
    params = std::move(start);
  }

  fs::create_directories(out_dir);
  {
    std::ofstream m(out_dir / "model.cfg");
    model.to_key_values().write(m);
    std::ofstream t(out_dir / "train.cfg");
    config.to_key_values().write(t);
  }
  std::ofstream train_log(out_dir / "train.log");
  std::ofstream eval_log(out_dir / "eval.log");
  if (!train_log || !eval_log) {
    throw InputError("cannot write logs under '" + out_dir.string() + "'");
  }
  train_log << "step\tlr\tloss\tgrad_norm\n";
  eval_log << "step\tloss\t" << DerReport::tsv_header() << '\n';

  const int workers = worker_count();
  TrainResult result;
  AdamState adam;
  std::map<long, ParamStore> kept;            // step -> params
  std::vector<std::pair<double, long>> rank;  // (eval loss, step)

  auto run_eval = [&](long step) {
    const EvalResult r =
        evaluate(model, params, eval_set, config.loss, decode, workers);
    result.log.evals.push_back({step, r.loss, r.report});
    eval_log << step << '\t' << fmt(r.loss) << '\t' << r.report.tsv() << '\n';
    eval_log.flush();
    if (progress != nullptr) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "step %ld  eval loss %.4f  DER %.2f%%\n",
                    step, r.loss, 100.0 * r.report.der());
      *progress << buf << std::flush;
    }
    if (step == 0) return;
    rank.emplace_back(r.loss, step);
    kept.emplace(step, params);
    std::sort(rank.begin(), rank.end());
    while (rank.size() > static_cast<std::size_t>(config.keep_best)) {
      kept.erase(rank.back().second);
      rank.pop_back();
    }
  };

  run_eval(0);

  std::vector<std::size_t> order(train_set.size());
  std::size_t cursor = order.size();
  std::uint64_t epoch = 0;
  std::vector<std::size_t> batch(static_cast<std::size_t>(config.batch));
  for (long step = 1; step <= config.steps; ++step) {
    for (std::size_t& slot : batch) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(derive_seed(config.seed, {kSaltShuffle, epoch++}));
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      slot = order[cursor++];
    }

    std::vector<double> losses(batch.size());
    std::vector<ParamStore> grads(batch.size());
    parallel_for(batch.size(), workers, [&](std::size_t i) {
      Tape tape;
      const std::vector<Var> leaves = bind(tape, params);
      const ParamView view(params, leaves);
      const Var l = example_loss(model, view, tape, train_set[batch[i]],
                                 config.loss);
      losses[i] = l.value()(0, 0);
      if (!std::isfinite(losses[i])) return;
      tape.backward(l);
      grads[i] = collect_grads(params, leaves);
    });

    double loss = 0.0;
    for (double l : losses) loss += l;
    loss /= static_cast<double>(batch.size());
    if (!std::isfinite(loss)) {
      std::string names;
      for (std::size_t i : batch) {
        names += (names.empty() ? "" : ",") + train_set[i].name;
      }
      throw TrainError("non-finite loss at step " + std::to_string(step) +
                       " (batch " + names + ")");
    }
    ParamStore g = std::move(grads[0]);
    for (std::size_t i = 1; i < grads.size(); ++i) accumulate_into(g, grads[i]);
    scale_all(g, 1.0 / static_cast<double>(batch.size()));
    const double norm = clip_grad_norm(g, config.clip);
    const double lr = lr_schedule(step, config);
    adam_step(params, g, adam, lr);

    result.log.steps.push_back({step, lr, loss, norm});
    train_log << step << '\t' << fmt(lr) << '\t' << fmt(loss) << '\t'
              << fmt(norm) << '\n';
    if (step % config.eval_every == 0 || step == config.steps) {
      train_log.flush();
      run_eval(step);
    }
  }

  for (fs::directory_iterator it(out_dir), end; it != end; ++it) {
    const std::string name = it->path().filename().string();
    if (name.starts_with("ckpt_") && name.ends_with(".ckpt")) {
      fs::remove(it->path());
    }
  }
  std::vector<ParamStore> best;
  for (const auto& [loss, step] : rank) {
    const fs::path p = out_dir / ("ckpt_" + std::to_string(step) + ".ckpt");
    save_checkpoint(p, kept.at(step));
    result.best.push_back(p);
    best.push_back(kept.at(step));
  }
  result.last = out_dir / "last.ckpt";
  save_checkpoint(result.last, params);
  result.averaged_params = average_params(best);
  result.averaged = out_dir / "avg.ckpt";
  save_checkpoint(result.averaged, result.averaged_params);
  return result;
}

}  // namespace send
