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

// send: command-line front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "send/checkpoint.hpp"
#include "send/datasim.hpp"
#include "send/experiments.hpp"
#include "send/metrics.hpp"
#include "send/model.hpp"
#include "send/parallel.hpp"
#include "send/postproc.hpp"
#include "send/pse.hpp"
#include "send/rttmio.hpp"
#include "send/trainer.hpp"

namespace fs = std::filesystem;

namespace {

using send::KeyValues;

void apply_overrides(KeyValues& kv, const std::vector<std::string>& sets) {
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    kv.set(s.substr(0, eq), s.substr(eq + 1));
  }
}

std::string check_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) {
    return "expected key=value, got '" + s + "'";
  }
  return {};
}

struct ModelFlags {
  std::string preset;
  std::string file;
  std::vector<std::string> sets;

  void add(CLI::App* app) {
    app->add_option("--preset", preset, "model preset (tiny, small, paper)");
    app->add_option("--model-config", file, "model key=value file")
        ->check(CLI::ExistingFile);
    app->add_option("--model-set", sets, "model override key=value")
        ->check(check_assignment);
  }

  send::ModelConfig load(const std::string& fallback_file = {}) const {
    KeyValues kv;
    if (!file.empty()) {
      kv = KeyValues::load(file);
    } else if (!fallback_file.empty() && preset.empty() &&
               fs::exists(fallback_file)) {
      kv = KeyValues::load(fallback_file);
    }
    if (!preset.empty()) kv.set("preset", preset);
    apply_overrides(kv, sets);
    return send::ModelConfig::from(kv);
  }
};

struct TrainFlags {
  std::string file;
  std::vector<std::string> sets;
  long seed = -1;

  void add(CLI::App* app) {
    app->add_option("--train-config", file, "training key=value file")
        ->check(CLI::ExistingFile);
    app->add_option("--set", sets, "training override key=value")
        ->check(check_assignment);
    app->add_option("--seed", seed, "training seed")->check(CLI::NonNegativeNumber);
  }

  send::TrainConfig load() const {
    KeyValues kv;
    if (!file.empty()) kv = KeyValues::load(file);
    apply_overrides(kv, sets);
    if (seed >= 0) kv.set("seed", std::to_string(seed));
    return send::TrainConfig::from(kv);
  }
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  KeyValues kv;
  kv.set("seeds", text);
  std::vector<std::uint64_t> out;
  for (long s : kv.get_longs("seeds", {})) {
    if (s < 0) throw send::ConfigError("seeds must be non-negative");
    out.push_back(static_cast<std::uint64_t>(s));
  }
  if (out.empty()) throw send::ConfigError("no seeds given");
  return out;
}

bool is_label_file(const std::string& path) {
  return fs::path(path).extension() == ".lab";
}

send::LabelMatrix read_label_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw send::InputError("cannot open '" + path + "'");
  return send::read_labels(in);
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw send::InputError("cannot write '" + path.string() + "'");
  out << text;
}

void print_report(const send::DerReport& r) {
  std::cout << r.text() << send::DerReport::tsv_header() << '\n'
            << r.tsv() << '\n';
}

// -- simulate ---------------------------------------------------------------

struct SimulateCmd {
  std::string out;
  std::string config;
  std::vector<std::string> sets;
  long seed = 1;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("simulate", "generate a synthetic corpus");
    app->add_option("--out", out, "corpus directory")->required();
    app->add_option("--config", config, "corpus key=value file")
        ->check(CLI::ExistingFile);
    app->add_option("--set", sets, "corpus override key=value")
        ->check(check_assignment);
    app->add_option("--seed", seed, "master seed")->check(CLI::NonNegativeNumber);
    app->callback([this] { run(); });
  }

  void run() const {
    KeyValues kv;
    if (!config.empty()) kv = KeyValues::load(config);
    apply_overrides(kv, sets);
    const send::CorpusConfig cfg = send::CorpusConfig::from(kv);
    const send::CorpusSummary s =
        send::make_corpus(cfg, static_cast<std::uint64_t>(seed), out);
    for (const send::SplitSummary& split : s.splits) {
      std::printf("%s\t%d chunks\toverlap %.4f\tattempts %d\n",
                  split.name.c_str(), split.chunks, split.overlap_ratio,
                  split.attempts);
    }
  }
};

// -- train ------------------------------------------------------------------

struct TrainCmd {
  std::string data;
  std::string out;
  ModelFlags model;
  TrainFlags train;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("train", "train a model");
    app->add_option("--data", data, "corpus directory")->required()
        ->check(CLI::ExistingDirectory);
    app->add_option("--out", out, "run directory")->required();
    model.add(app);
    train.add(app);
    app->callback([this] { run(); });
  }

  void run() const {
    const send::ModelConfig mc = model.load();
    const send::TrainConfig tc = train.load();
    const send::TrainResult r = send::train(mc, data, tc, out, &std::cerr);
    const send::EvalLogEntry& last = r.log.evals.back();
    std::printf("final eval loss %.6f DER %.6f\naveraged checkpoint %s\n",
                last.loss, last.report.der(), r.averaged.string().c_str());
  }
};

// -- infer ------------------------------------------------------------------

struct InferCmd {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::string out;
  ModelFlags model;
  int median_window = 0;
  int min_duration = 0;
  double threshold = 0.5;
  int limit = 0;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("infer", "decode a split into RTTM");
    app->add_option("--checkpoint", checkpoint, "SENDCKPT1 file")->required()
        ->check(CLI::ExistingFile);
    app->add_option("--data", data, "corpus directory")->required()
        ->check(CLI::ExistingDirectory);
    app->add_option("--split", split, "split name")
        ->check(CLI::IsMember({"train", "eval", "test"}));
    app->add_option("--out", out, "output directory")->required();
    app->add_option("--median-window", median_window,
                    "odd median window in frames (default: 83 at 100 fps)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--min-duration", min_duration, "drop runs shorter than this")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--threshold", threshold, "multilabel head threshold")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--limit", limit, "first N chunks only")
        ->check(CLI::NonNegativeNumber);
    model.add(app);
    app->callback([this] { run(); });
  }

  void run() const {
    const send::ModelConfig mc =
        model.load((fs::path(checkpoint).parent_path() / "model.cfg").string());
    const send::ParamStore params = send::load_checkpoint(checkpoint);
    const send::DataSplit ds = send::load_split(data, split, limit);
    const std::vector<send::Example> examples = send::make_examples(ds, mc);
    const double rate = ds.manifest.config.frame_rate;
    send::DecodeOptions opt;
    opt.frame_rate = rate;
    opt.median_window =
        median_window > 0 ? median_window : send::scaled_median_window(rate);
    opt.min_duration = min_duration;
    if (opt.median_window % 2 == 0) {
      throw send::DomainError("median window must be odd");
    }

    std::vector<send::Decoded> decoded(examples.size());
    send::parallel_for(examples.size(), send::worker_count(), [&](std::size_t i) {
      const send::Tensor logits = send::infer_logits(
          mc, params, examples[i].features, examples[i].embeddings);
      send::DecodeOptions o = opt;
      o.recording = split + "_" + ds.chunks[i].name;
      if (mc.head == send::HeadKind::kPse) {
        decoded[i] = send::decode_logits(mc, logits, o);
      } else {
        decoded[i] = send::decode_multilabel(send::sigmoid(logits), threshold, o);
      }
    });

    fs::create_directories(out);
    std::ostringstream hyp, ref;
    send::DerReport total;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      const std::string rec = split + "_" + ds.chunks[i].name;
      send::write_rttm(hyp, decoded[i].segments);
      send::write_rttm(ref, send::segments_from_binary(examples[i].labels, rate, rec));
      std::ostringstream lab;
      send::write_labels(lab, decoded[i].labels);
      write_text_file(fs::path(out) / (rec + ".lab"), lab.str());
      total += send::der_frames(examples[i].labels, decoded[i].labels);
    }
    write_text_file(fs::path(out) / "hyp.rttm", hyp.str());
    write_text_file(fs::path(out) / "ref.rttm", ref.str());
    std::printf("decoded %zu chunks into %s\n", examples.size(), out.c_str());
    print_report(total);
  }
};

// -- score ------------------------------------------------------------------

struct ScoreCmd {
  std::string ref;
  std::string hyp;
  double frame_rate = 100.0;
  double collar = 0.0;
  std::string mapping = "identity";

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("score", "diarization error rate");
    app->add_option("--ref", ref, "reference RTTM or .lab file")->required()
        ->check(CLI::ExistingFile);
    app->add_option("--hyp", hyp, "hypothesis RTTM or .lab file")->required()
        ->check(CLI::ExistingFile);
    app->add_option("--frame-rate", frame_rate, "frames per second")
        ->check(CLI::PositiveNumber);
    app->add_option("--collar", collar, "no-score collar in seconds")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--mapping", mapping, "speaker mapping")
        ->check(CLI::IsMember({"identity", "optimal"}));
    app->callback([this] { run(); });
  }

  void run() const {
    const bool optimal = mapping == "optimal";
    if (is_label_file(ref) != is_label_file(hyp)) {
      throw CLI::ValidationError("--ref/--hyp", "both must be RTTM or both .lab");
    }
    if (is_label_file(ref)) {
      if (collar > 0.0) {
        throw CLI::ValidationError("--collar", "not supported for label files");
      }
      print_report(send::der_frames(read_label_file(ref), read_label_file(hyp),
                                    optimal ? send::SpeakerMapping::kOptimal
                                            : send::SpeakerMapping::kIdentity));
      return;
    }
    if (optimal && collar > 0.0) {
      throw CLI::ValidationError("--mapping", "optimal mapping needs --collar 0");
    }
    const send::RttmDocument r = send::read_rttm_file(ref, frame_rate);
    const send::RttmDocument h = send::read_rttm_file(hyp, frame_rate);
    std::set<std::string> ids;
    for (const auto* doc : {&r, &h}) {
      for (const send::SegmentList& s : doc->recordings) ids.insert(s.recording);
    }
    send::DerReport total;
    for (const std::string& id : ids) {
      send::SegmentList empty;
      empty.recording = id;
      const send::SegmentList* rs = r.find(id);
      const send::SegmentList* hs = h.find(id);
      const send::SegmentList& rl = rs ? *rs : empty;
      const send::SegmentList& hl = hs ? *hs : empty;
      if (!optimal) {
        total += send::der_segments(rl, hl, frame_rate, collar);
        continue;
      }
      std::set<std::string> names;
      Eigen::Index frames = 0;
      for (const auto* l : {&rl, &hl}) {
        for (const send::Segment& s : l->segments) {
          names.insert(s.speaker);
          frames = std::max(frames, send::frame_ceil(s.onset + s.duration,
                                                     frame_rate));
        }
      }
      const std::vector<std::string> spk(names.begin(), names.end());
      total += send::der_frames(
          send::frames_from_segments(rl, frame_rate, frames, spk),
          send::frames_from_segments(hl, frame_rate, frames, spk),
          send::SpeakerMapping::kOptimal);
    }
    const int skipped = r.skipped + h.skipped;
    if (skipped > 0) {
      std::fprintf(stderr, "skipped %d non-SPEAKER records\n", skipped);
    }
    print_report(total);
  }
};

// -- codec ------------------------------------------------------------------

struct CodecCmd {
  int n = 0;
  int k = 0;
  std::string in;
  std::string out;
  std::string policy = "strict";
  bool encode = true;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("codec", "power-set label codec");
    app->require_subcommand(1);
    for (const char* name : {"encode", "decode"}) {
      CLI::App* sub = app->add_subcommand(
          name, std::string(name) == "encode" ? "label file -> class ids"
                                              : "class ids -> label file");
      sub->add_option("--n", n, "speakers")->required()->check(CLI::Range(1, 16));
      sub->add_option("--k", k, "max overlap")->required()->check(CLI::Range(1, 16));
      sub->add_option("--in", in, "input file")->required()
          ->check(CLI::ExistingFile);
      sub->add_option("--out", out, "output file (default stdout)");
      if (std::string(name) == "encode") {
        sub->add_option("--policy", policy, "frames above K")
            ->check(CLI::IsMember({"strict", "keep-lowest"}));
      }
      const bool is_encode = std::string(name) == "encode";
      sub->callback([this, is_encode] {
        encode = is_encode;
        run();
      });
    }
  }

  void run() const {
    const send::PseCodec codec(n, k);
    std::ifstream src(in);
    if (!src) throw send::InputError("cannot open '" + in + "'");
    std::ostringstream text;
    if (encode) {
      const send::LabelMatrix labels = send::read_labels(src, n);
      send::write_class_ids(
          text, codec.encode_sequence(labels, policy == "keep-lowest"
                                                  ? send::OverflowPolicy::kKeepLowest
                                                  : send::OverflowPolicy::kStrict));
    } else {
      const std::vector<int> ids = send::read_class_ids(src);
      send::write_labels(text, codec.decode_sequence(ids));
    }
    if (out.empty()) {
      std::cout << text.str();
    } else {
      write_text_file(out, text.str());
    }
  }
};

// -- inspect ----------------------------------------------------------------

struct InspectCmd {
  ModelFlags model;
  long frames = 100;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("inspect", "model size and cost");
    model.add(app);
    app->add_option("--frames", frames, "frames for the FLOPs figure")
        ->check(CLI::PositiveNumber);
    app->callback([this] { run(); });
  }

  void run() const {
    const send::ModelConfig mc = model.load();
    const auto [sl, sr] = send::receptive_field(mc.speech_layers);
    const auto [pl, pr] = send::receptive_field(mc.postnet_layers);
    const long params = send::param_count(mc);
    const double flops = send::flops_count(mc, frames);
    std::printf("speech encoder receptive field\tleft %ld\tright %ld\tspan %ld\n",
                sl, sr, sl + sr + 1);
    std::printf("post-net receptive field\tleft %ld\tright %ld\tspan %ld\n", pl,
                pr, pl + pr + 1);
    std::printf("combined FSMN receptive field\tleft %ld\tright %ld\tspan %ld\n",
                sl + pl, sr + pr, sl + pl + sr + pr + 1);
    std::printf("head classes\t%d\n", mc.head_width());
    std::printf("parameters\t%ld\t(%.2fM)\n", params, params / 1e6);
    std::printf("flops\t%.0f\t(%.2fM per %ld frames)\n", flops, flops / 1e6,
                frames);
    if (model.preset == "paper") {
      std::printf("reference size\t18.42M parameters, 36.73M FLOPs\n");
      std::printf("parameter deviation\t%+.2f%%\n",
                  100.0 * (params / 1e6 - 18.42) / 18.42);
    }
  }
};

// -- experiment -------------------------------------------------------------

struct ExperimentCmd {
  std::string data;
  std::string out;
  std::string seeds = "1,2,3";
  ModelFlags model;
  TrainFlags train;
  double sweep_step = 0.1;
  double alpha = 0.99;
  int test_chunks = 0;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("experiment", "scripted comparisons");
    app->require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> kinds = {
        {"pse-ablation", "PSE head against the multilabel head"},
        {"ablation", "without CD scorer / with unit strides"},
        {"stability", "training loss of SEND, CI-only and CD-only"}};
    for (const auto& [name, help] : kinds) {
      CLI::App* sub = app->add_subcommand(name, help);
      sub->add_option("--data", data, "corpus directory")->required()
          ->check(CLI::ExistingDirectory);
      sub->add_option("--out", out, "output directory")->required();
      sub->add_option("--seeds", seeds, "comma separated seeds");
      sub->add_option("--sweep-step", sweep_step, "multilabel threshold grid")
          ->check(CLI::Range(0.0, 1.0));
      sub->add_option("--alpha", alpha, "loss smoothing factor")
          ->check(CLI::Range(0.0, 1.0));
      sub->add_option("--test-chunks", test_chunks, "first N test chunks")
          ->check(CLI::NonNegativeNumber);
      model.add(sub);
      train.add(sub);
      const std::string kind = name;
      sub->callback([this, kind] { run(kind); });
    }
  }

  void run(const std::string& kind) const {
    send::ExperimentOptions opt;
    opt.data_root = data;
    opt.out_dir = out;
    opt.seeds = parse_seeds(seeds);
    opt.model = model.load();
    opt.train = train.load();
    opt.sweep_step = sweep_step;
    opt.test_chunks = test_chunks;
    opt.progress = &std::cerr;
    if (kind == "stability") {
      const send::StabilityResult r = send::run_stability(opt, alpha);
      std::printf("variant\tinitial_loss\tfinal_smoothed\tratio\n");
      for (const send::StabilityCurve& c : r.curves) {
        std::printf("%s\t%.6f\t%.6f\t%.6f\n", c.variant.c_str(), c.initial_loss,
                    c.final_smoothed, c.ratio);
      }
      return;
    }
    const send::ExperimentResult r = kind == "pse-ablation"
                                         ? send::run_pse_ablation(opt)
                                         : send::run_ablation(opt);
    std::printf("variant\tmedian_der\tmedian_best3\n");
    for (const send::VariantSummary& s : r.summary) {
      if (s.median_best3 >= 0.0) {
        std::printf("%s\t%.6f\t%.6f\n", s.variant.c_str(), s.median_der,
                    s.median_best3);
      } else {
        std::printf("%s\t%.6f\tNA\n", s.variant.c_str(), s.median_der);
      }
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speaker diarization with power-set encoded labels"};
  app.require_subcommand(1);
  SimulateCmd simulate;
  TrainCmd train;
  InferCmd infer;
  ScoreCmd score;
  CodecCmd codec;
  InspectCmd inspect;
  ExperimentCmd experiment;
  simulate.add(app);
  train.add(app);
  infer.add(app);
  score.add(app);
  codec.add(app);
  inspect.add(app);
  experiment.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "send: usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "send: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
