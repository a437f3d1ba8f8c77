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

#ifndef SEND_EXPERIMENTS_HPP_
#define SEND_EXPERIMENTS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "send/metrics.hpp"
#include "send/model.hpp"
#include "send/trainer.hpp"

namespace send {

struct ExperimentOptions {
  std::filesystem::path data_root;
  std::filesystem::path out_dir;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  ModelConfig model = ModelConfig::preset("small");
  TrainConfig train;       // `seed` and `loss` are set per run
  double sweep_step = 0.1;
  int test_chunks = 0;     // 0 = whole test split
  std::ostream* progress = nullptr;
};

struct RunResult {
  std::string variant;
  std::uint64_t seed = 0;
  DerReport test;           // averaged checkpoint on the test split
  double best3 = -1.0;      // multilabel heads: best-3 threshold mean DER
  std::filesystem::path dir;
};

struct VariantSummary {
  std::string variant;
  double median_der = 0.0;
  double median_best3 = -1.0;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::vector<VariantSummary> summary;

  const VariantSummary& variant(const std::string& name) const;
};

double median(std::vector<double> values);

/// Trains `model` with `train` into `dir` and scores the averaged
/// checkpoint on the test split.
RunResult run_variant(const std::string& variant, const ModelConfig& model,
                      const TrainConfig& train, const ExperimentOptions& opt,
                      const std::filesystem::path& dir);

/// PSE head against the multilabel head (threshold grid on the test split).
ExperimentResult run_pse_ablation(const ExperimentOptions& opt);

/// Full model, without the CD scorer, and without CD with unit strides.
ExperimentResult run_ablation(const ExperimentOptions& opt);

struct StabilityCurve {
  std::string variant;
  double initial_loss = 0.0;   // loss of the first step, random init
  double final_smoothed = 0.0;
  double ratio = 0.0;          // final_smoothed / initial_loss
  std::vector<double> smoothed;
};

struct StabilityResult {
  std::vector<StabilityCurve> curves;
  const StabilityCurve& variant(const std::string& name) const;
};

/// Full model, CI-only and CD-only trained from random init for
/// `train.steps` steps; losses smoothed with an EMA of factor `alpha`.
StabilityResult run_stability(const ExperimentOptions& opt, double alpha);

}  // namespace send

#endif  // SEND_EXPERIMENTS_HPP_
