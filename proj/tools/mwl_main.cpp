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

// mwl: command-line front end over the C API.
//
//   mwl synth --out data
//   mwl preprocess --data data --out ds
//   mwl train --dataset ds --out run
//   mwl eval --checkpoint run --out run

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mwl/mwl.h"

namespace {

using nlohmann::json;

constexpr int kUsageError = MWL_ERR_INPUT;

class Overrides {
 public:
  explicit Overrides(CLI::App& app) : app_(app) {}

  template <typename T>
  void Option(const std::string& names, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_.add_option(names, *value, help);
    if constexpr (!std::is_same_v<T, std::string>) opt->delimiter(',');
    apply_.push_back([opt, value, key](json& j) {
      if (opt->count()) j[key] = *value;
    });
  }

  void Flag(const std::string& names, const std::string& key, bool value,
            const std::string& help) {
    CLI::Option* opt = app_.add_flag(names, help);
    apply_.push_back([opt, key, value](json& j) {
      if (opt->count()) j[key] = value;
    });
  }

  void ApplyTo(json& j) const {
    for (const auto& f : apply_) f(j);
  }

 private:
  CLI::App& app_;
  std::vector<std::function<void(json&)>> apply_;
};

int Report(mwl_status status) {
  std::fprintf(stderr, "mwl: error: %s\n", mwl_last_error());
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mental workload estimation from EEG."};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_version_flag("--version", mwl_version());

  const std::pair<const char*, const char*> commands[] = {
      {"synth", "Write a synthetic STEW-shaped corpus"},
      {"preprocess", "Window, label and split a corpus; store normalization"},
      {"train", "Train a model on a preprocessed dataset"},
      {"eval", "Evaluate a checkpoint on the held-out participants"},
      {"predict", "Predict every window of one recording"},
      {"ablation", "Run the branch and MDRB-mode sweeps over shifts"},
      {"spectrum", "Export the PSD frame and 3D block of one window"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  std::string config_path;
  app.add_option("--config", config_path, "JSON run config; flags override it");

  Overrides o(app);
  o.Option<std::string>("--data", "data", "Directory with subNN_lo/hi recordings");
  o.Option<std::string>("--ratings", "ratings", "Ratings table (default <data>/ratings.txt)");
  o.Option<std::string>("--adapter", "adapter", "Recording format: stew_raw or csv");
  o.Option<double>("--trim", "trim_seconds", "Seconds dropped from both ends of each recording");
  o.Option<std::string>("--dataset", "dataset", "Preprocessed dataset directory");
  o.Option<std::string>("--checkpoint", "checkpoint", "Training run or checkpoint directory");
  o.Option<std::string>("--recording", "recording", "Single recording file");
  o.Option<std::size_t>("--window", "window", "Window length in samples");
  o.Option<std::size_t>("--shift", "shift", "Window shift in samples");
  o.Option<double>("--train-fraction", "train_fraction", "Share of participants for training");
  o.Option<double>("--val-fraction", "val_fraction",
                   "Share of training participants held out for validation");
  o.Option<std::string>("--branches", "branches", "Branch set, e.g. time,b1,b2 or time+b1");
  o.Option<std::string>("--head", "head", "class3 or cont");
  o.Option<std::string>("--mdrb-mode", "mdrb_mode", "combined, branch1 or branch2");
  o.Option<std::size_t>("--mdrb-filters", "mdrb_filters", "Filters per MDRB convolution");
  o.Option<std::size_t>("--tcn-filters", "tcn_filters", "Filters per TCN convolution");
  o.Option<std::size_t>("--tcn-kernel", "tcn_kernel", "TCN kernel size");
  o.Option<std::size_t>("--tcn-stacks", "tcn_stacks", "TCN stacks");
  o.Option<std::vector<std::size_t>>("--tcn-dilations", "tcn_dilations",
                                     "TCN dilations, comma separated");
  o.Option<int>("--epochs", "epochs", "Maximum epochs");
  o.Option<double>("--lr", "lr", "Adam learning rate");
  o.Option<std::size_t>("--batch", "batch", "Mini-batch size");
  o.Option<int>("--patience", "patience", "Early-stopping patience in epochs");
  o.Option<std::uint64_t>("--seed", "seed", "Random seed");
  o.Option<std::string>("--split", "split", "Split to evaluate: test (default), val, train");
  o.Flag("--csv", "csv", true, "Also write the evaluation report as CSV");
  o.Option<int>("--participants", "participants", "Synthetic participants");
  o.Option<double>("--seconds", "seconds", "Synthetic seconds per recording");
  o.Option<double>("--separability", "separability", "Synthetic class separability");
  o.Option<int>("--unrated", "unrated", "Synthetic participants without ratings");
  o.Option<std::vector<std::size_t>>("--shifts", "shifts", "Ablation shifts, comma separated");
  o.Option<std::vector<std::string>>("--ablation-branches", "ablation_branches",
                                     "Ablation branch sets, comma separated");
  o.Flag("--no-mdrb-sweep", "mdrb_sweep", false, "Skip the MDRB-mode sweep");
  o.Option<std::size_t>("--eval-shift", "eval_shift", "Shift for ablation val/test windows");
  o.Option<std::size_t>("--nfft", "nfft", "Welch segment length for spectrum");
  o.Option<std::size_t>("--window-index", "window_index", "Window exported by spectrum");
  o.Option<std::string>("--out", "out", "Output directory");
  o.Flag("-v,--verbose", "verbose", true, "Progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  json config = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::fprintf(stderr, "mwl: error: cannot open %s\n", config_path.c_str());
      return kUsageError;
    }
    try {
      config = json::parse(in);
    } catch (const json::exception& e) {
      std::fprintf(stderr, "mwl: error: %s: %s\n", config_path.c_str(), e.what());
      return kUsageError;
    }
    if (!config.is_object()) {
      std::fprintf(stderr, "mwl: error: %s: expected a JSON object\n", config_path.c_str());
      return kUsageError;
    }
  }
  o.ApplyTo(config);

  const std::string command = app.get_subcommands().front()->get_name();
  char* out = nullptr;
  const mwl_status status = mwl_run(command.c_str(), config.dump().c_str(), &out);
  if (status != MWL_OK) return Report(status);
  std::cout << out << "\n";
  mwl_string_free(out);
  return 0;
}
