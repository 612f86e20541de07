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

// Command layer shared by the C API and the command-line tool. Every command
// takes a resolved RunConfig, writes its artifacts under `out` and returns a
// JSON summary.

#ifndef MWL_PIPELINE_HPP_
#define MWL_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mwl/blocks.hpp"
#include "mwl/ingest.hpp"

namespace mwl {

struct RunConfig {
  // Inputs.
  std::string data = "data";
  std::string ratings;  // empty: <data>/ratings.txt
  Adapter adapter = Adapter::kStewRaw;
  double trim_seconds = 0.0;
  std::string dataset;     // preprocess output directory
  std::string checkpoint;  // train output directory (or its checkpoint/)
  std::string recording;   // single file for predict and spectrum

  // Windowing and split.
  std::size_t window = kDefaultWindow;
  std::size_t shift = kDefaultShift;
  double train_fraction = 0.8;
  double val_fraction = 0.2;  // share of training participants held out

  // Model.
  std::string branches = "time+b1+b2";
  std::optional<HeadKind> head;  // class3 when training; the model's own
                                 // head when evaluating
  MdrbMode mdrb_mode = MdrbMode::kCombined;
  std::size_t mdrb_filters = 32;
  TcnConfig tcn;

  // Training.
  int epochs = 150;
  std::optional<double> lr;  // by head when unset
  std::size_t batch = 64;
  int patience = 10;
  std::uint64_t seed = 1;

  // Evaluation.
  std::string split = "test";
  bool csv = false;

  // Synthetic corpus.
  int participants = 6;
  double seconds = 60.0;
  double separability = 1.5;
  int unrated = 0;

  // Ablation.
  std::vector<std::size_t> shifts = {128, 256, 384, 512};
  std::vector<std::string> ablation_branches;  // empty: all seven
  bool mdrb_sweep = true;
  std::size_t eval_shift = kDefaultShift;

  // Spectrum export.
  std::size_t nfft = 64;
  std::size_t window_index = 0;

  std::string out = "out";
  bool verbose = false;

  // Unknown keys and wrongly typed values raise ParseError; out-of-range
  // values raise ValidationError or ConfigError.
  static RunConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
  void Validate() const;
};

nlohmann::json CmdSynth(const RunConfig& config);
nlohmann::json CmdPreprocess(const RunConfig& config);
nlohmann::json CmdTrain(const RunConfig& config);
nlohmann::json CmdEval(const RunConfig& config);
nlohmann::json CmdPredict(const RunConfig& config);
nlohmann::json CmdAblation(const RunConfig& config);
nlohmann::json CmdSpectrum(const RunConfig& config);

// Dispatches on the command name; ConfigError for an unknown command.
nlohmann::json RunCommand(const std::string& command, const RunConfig& config);

}  // namespace mwl

#endif  // MWL_PIPELINE_HPP_
