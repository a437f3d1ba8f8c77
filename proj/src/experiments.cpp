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

#include "send/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "send/checkpoint.hpp"
#include "send/datasim.hpp"
#include "send/parallel.hpp"

namespace send {

namespace fs = std::filesystem;

namespace {

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void note(const ExperimentOptions& opt, const std::string& line) {
  if (opt.progress != nullptr) *opt.progress << line << '\n' << std::flush;
}

ExperimentResult run_variants(
    const ExperimentOptions& opt,
    const std::vector<std::pair<std::string, ModelConfig>>& variants) {
  ExperimentResult result;
  for (const auto& [name, model] : variants) {
    TrainConfig tc = opt.train;
    tc.loss = model.head == HeadKind::kPse ? LossKind::kCePse
                                           : LossKind::kBceMultilabel;
    std::vector<double> ders, best3;
    for (std::uint64_t seed : opt.seeds) {
      tc.seed = seed;
      const fs::path dir = opt.out_dir / (name + "_seed" + std::to_string(seed));
      note(opt, "== " + name + " seed " + std::to_string(seed));
      RunResult r = run_variant(name, model, tc, opt, dir);
      ders.push_back(r.test.der());
      if (r.best3 >= 0.0) best3.push_back(r.best3);
      note(opt, name + " seed " + std::to_string(seed) + " test DER " +
                    fmt6(r.test.der()) +
                    (r.best3 >= 0.0 ? " best3 " + fmt6(r.best3) : ""));
      result.runs.push_back(std::move(r));
    }
    result.summary.push_back(
        {name, median(ders), best3.empty() ? -1.0 : median(best3)});
  }

  fs::create_directories(opt.out_dir);
  std::ofstream runs(opt.out_dir / "results.tsv");
  runs << "variant\tseed\t" << DerReport::tsv_header() << "\tbest3\n";
  for (const RunResult& r : result.runs) {
    runs << r.variant << '\t' << r.seed << '\t' << r.test.tsv() << '\t'
         << (r.best3 >= 0.0 ? fmt6(r.best3) : "NA") << '\n';
  }
  std::ofstream summary(opt.out_dir / "summary.tsv");
  summary << "variant\tmedian_der\tmedian_best3\n";
  for (const VariantSummary& s : result.summary) {
    summary << s.variant << '\t' << fmt6(s.median_der) << '\t'
            << (s.median_best3 >= 0.0 ? fmt6(s.median_best3) : "NA") << '\n';
  }
  return result;
}

}  // namespace

const VariantSummary& ExperimentResult::variant(const std::string& name) const {
  for (const VariantSummary& s : summary) {
    if (s.variant == name) return s;
  }
  throw IndexError("no experiment variant '" + name + "'");
}

const StabilityCurve& StabilityResult::variant(const std::string& name) const {
  for (const StabilityCurve& c : curves) {
    if (c.variant == name) return c;
  }
  throw IndexError("no stability variant '" + name + "'");
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

RunResult run_variant(const std::string& variant, const ModelConfig& model,
                      const TrainConfig& train, const ExperimentOptions& opt,
                      const fs::path& dir) {
  const TrainResult tr = send::train(model, opt.data_root, train, dir, opt.progress);
  const CorpusManifest manifest = read_manifest(opt.data_root);
  const std::vector<Example> test =
      make_examples(load_split(opt.data_root, "test", opt.test_chunks), model);
  DecodeOptions decode;
  decode.frame_rate = manifest.config.frame_rate;
  decode.median_window = train.median_window > 0
                             ? train.median_window
                             : scaled_median_window(decode.frame_rate);
  const int workers = worker_count();

  RunResult r;
  r.variant = variant;
  r.seed = train.seed;
  r.dir = dir;
  r.test = evaluate(model, tr.averaged_params, test, train.loss, decode, workers)
               .report;
  if (model.head == HeadKind::kMultilabel) {
    std::vector<Tensor> probs(test.size());
    std::vector<LabelMatrix> refs(test.size());
    parallel_for(test.size(), workers, [&](std::size_t i) {
      probs[i] = sigmoid(infer_logits(model, tr.averaged_params,
                                      test[i].features, test[i].embeddings));
    });
    for (std::size_t i = 0; i < test.size(); ++i) refs[i] = test[i].labels;
    const SweepResult sweep =
        threshold_sweep(probs, refs, opt.sweep_step, decode.median_window);
    r.best3 = sweep.best3_mean;
    std::ofstream out(dir / "sweep.tsv");
    out << "threshold\t" << DerReport::tsv_header() << '\n';
    for (const SweepPoint& p : sweep.points) {
      out << fmt6(p.threshold) << '\t' << p.report.tsv() << '\n';
    }
    out << "best3_mean\t" << fmt6(sweep.best3_mean) << '\n';
  }
  std::ofstream out(dir / "test.tsv");
  out << DerReport::tsv_header() << '\n' << r.test.tsv() << '\n';
  return r;
}

ExperimentResult run_pse_ablation(const ExperimentOptions& opt) {
  ModelConfig pse = opt.model;
  pse.head = HeadKind::kPse;
  ModelConfig multi = opt.model;
  multi.head = HeadKind::kMultilabel;
  return run_variants(opt, {{"pse", pse}, {"multilabel", multi}});
}

ExperimentResult run_ablation(const ExperimentOptions& opt) {
  ModelConfig full = opt.model;
  ModelConfig no_cd = full;
  no_cd.cd = CdKind::kNone;
  ModelConfig flat = no_cd;
  for (FsmnSpec& s : flat.speech_layers) s.stride = 1;
  for (FsmnSpec& s : flat.postnet_layers) s.stride = 1;
  return run_variants(opt, {{"send", full}, {"no-cd", no_cd},
                            {"no-cd-stride1", flat}});
}

StabilityResult run_stability(const ExperimentOptions& opt, double alpha) {
  ModelConfig full = opt.model;
  full.use_ci = true;
  full.cd = CdKind::kAttention;
  ModelConfig ci_only = full;
  ci_only.cd = CdKind::kNone;
  ModelConfig cd_only = full;
  cd_only.use_ci = false;

  StabilityResult result;
  const std::uint64_t seed = opt.seeds.empty() ? 1 : opt.seeds.front();
  for (const auto& [name, model] :
       std::vector<std::pair<std::string, ModelConfig>>{
           {"send", full}, {"ci-only", ci_only}, {"cd-only", cd_only}}) {
    TrainConfig tc = opt.train;
    tc.seed = seed;
    tc.loss = model.head == HeadKind::kPse ? LossKind::kCePse
                                           : LossKind::kBceMultilabel;
    tc.init.clear();
    note(opt, "== stability " + name);
    const TrainResult tr =
        send::train(model, opt.data_root, tc, opt.out_dir / name, opt.progress);
    StabilityCurve c;
    c.variant = name;
    c.smoothed = smooth_losses(tr.log.steps, alpha);
    c.initial_loss = tr.log.steps.front().loss;
    c.final_smoothed = c.smoothed.back();
    c.ratio = c.final_smoothed / c.initial_loss;
    note(opt, name + " initial " + fmt6(c.initial_loss) + " smoothed final " +
                  fmt6(c.final_smoothed) + " ratio " + fmt6(c.ratio));
    result.curves.push_back(std::move(c));
  }

  fs::create_directories(opt.out_dir);
  std::ofstream curves(opt.out_dir / "stability.tsv");
  curves << "step";
  for (const StabilityCurve& c : result.curves) curves << '\t' << c.variant;
  curves << '\n';
  for (std::size_t i = 0; i < result.curves.front().smoothed.size(); ++i) {
    curves << i + 1;
    for (const StabilityCurve& c : result.curves) {
      curves << '\t' << fmt6(c.smoothed[i]);
    }
    curves << '\n';
  }
  std::ofstream summary(opt.out_dir / "summary.tsv");
  summary << "variant\tinitial_loss\tfinal_smoothed\tratio\n";
  for (const StabilityCurve& c : result.curves) {
    summary << c.variant << '\t' << fmt6(c.initial_loss) << '\t'
            << fmt6(c.final_smoothed) << '\t' << fmt6(c.ratio) << '\n';
  }
  return result;
}

}  // namespace send
