// Copyright 2026 The mwlnet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Mini-batch Adam training with early stopping, plus accuracy / CCC
// evaluation and the branch and shift ablation harness.

#ifndef MWL_TRAINER_HPP_
#define MWL_TRAINER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mwl/ingest.hpp"
#include "mwl/model.hpp"

namespace mwl {

struct Sample {
  Features features;
  LabelBundle label;
};

std::vector<Sample> PrepareSamples(std::span<const Window> windows,
                                   const NormalizationStats& norm,
                                   BranchSet needed = BranchSet::All());

struct TrainConfig {
  int epochs = 150;
  double lr = 1e-3;
  std::size_t batch_size = 64;
  int patience = 10;
  std::uint64_t seed = 1;

  // 0.001 for classification, 0.0001 for continuous levels.
  static double DefaultLr(HeadKind head);
  void Validate() const;
  nlohmann::json ToJson() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct History {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  bool stopped_early = false;
  // True when no validation samples were given and selection fell back to
  // the training loss.
  bool selected_on_train = false;

  nlohmann::json ToJson() const;
};

// Mean loss of `model` over `samples` (cross entropy or MSE by head kind),
// without recording a graph.
double MeanLoss(const FusionModel& model, std::span<const Sample> samples);

// Trains in place. After each epoch the validation loss is measured; the
// parameters of the best epoch are restored on return. Stops after
// `patience` epochs without improvement. Throws TrainingError carrying the
// epoch when the loss or a gradient becomes non-finite.
History Train(FusionModel& model, std::span<const Sample> train,
              std::span<const Sample> val, const TrainConfig& config,
              const std::function<void(const EpochRecord&)>& on_epoch = {});

// Throws ValidationError on empty or unequal inputs.
double Accuracy(std::span<const int> predictions, std::span<const int> labels);

struct CccResult {
  double value = 0.0;
  bool degenerate = false;  // denominator vanished; value reported as 0
};

// 2 cov(p, y) / (var(p) + var(y) + (mean(p) - mean(y))^2), population
// moments. Needs at least two equal-length samples.
CccResult Ccc(std::span<const double> predictions, std::span<const double> labels);

struct EvalReport {
  HeadKind task = HeadKind::kClass3;
  std::size_t n_samples = 0;
  std::optional<double> accuracy;
  std::array<std::array<std::size_t, 3>, 3> confusion{};  // [true][predicted]
  std::array<std::optional<double>, 3> recall{};
  std::optional<double> ccc;
  bool ccc_degenerate = false;

  nlohmann::json ToJson() const;
  std::string ToCsv() const;
};

// Throws ConfigError when `task` differs from the model head.
EvalReport Evaluate(const FusionModel& model, std::span<const Sample> samples,
                    HeadKind task);

// Records per split, already labelled.
struct AblationData {
  std::vector<EegRecord> train;
  std::vector<EegRecord> val;
  std::vector<EegRecord> test;
  std::size_t window = kDefaultWindow;
  // Validation and test windows always use this shift; only the training
  // windows follow the swept shift.
  std::size_t eval_shift = kDefaultShift;
};

struct AblationOptions {
  std::vector<BranchSet> branch_sets = BranchSet::AllCombinations();
  std::vector<std::size_t> shifts = {128, 256, 384, 512};
  bool mdrb_sweep = true;
  ModelConfig model;  // branches, head and mdrb_mode are set per cell
  TrainConfig class_train;
  TrainConfig cont_train;
  std::function<void(const std::string&)> progress;
};

struct AblationCell {
  std::string row;
  std::size_t shift = 0;
  double accuracy = 0.0;
  double ccc = 0.0;
  bool ccc_degenerate = false;
};

struct AblationResult {
  std::vector<std::size_t> shifts;
  std::vector<std::string> branch_rows;
  std::vector<std::string> mdrb_rows;
  std::vector<AblationCell> branch_cells;
  std::vector<AblationCell> mdrb_cells;

  nlohmann::json ToJson() const;
  // Wide tables: one row per configuration, acc_<shift>,ccc_<shift> columns.
  std::string BranchCsv() const;
  std::string MdrbCsv() const;
};

// Trains and evaluates one cell (both heads) exactly as RunAblation does.
AblationCell RunAblationCell(const AblationData& data, BranchSet branches,
                             MdrbMode mode, std::size_t shift,
                             const AblationOptions& options);

AblationResult RunAblation(const AblationData& data,
                           const AblationOptions& options);

}  // namespace mwl

#endif  // MWL_TRAINER_HPP_
