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
// Three-branch fusion model: a TCN over the standardized raw window (Time)
// and two MDRB branches over log-standardized spectral volumes computed with
// 64-point (B1) and 128-point (B2) Welch spectra. Each branch ends in its own
// head; the model output is the arithmetic mean of the branch outputs.

#ifndef MWL_MODEL_HPP_
#define MWL_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mwl/autodiff.hpp"
#include "mwl/blocks.hpp"
#include "mwl/ingest.hpp"

namespace mwl {

inline constexpr std::size_t kB1Nfft = 64;
inline constexpr std::size_t kB2Nfft = 128;

struct BranchSet {
  bool time = false;
  bool b1 = false;
  bool b2 = false;

  // Accepts "time,b1,b2", "time+b1" or "all" (case-insensitive).
  static BranchSet Parse(std::string_view text);
  static BranchSet All() { return {true, true, true}; }
  // The seven non-empty combinations: time, b1, b2, time+b1, time+b2,
  // b1+b2, time+b1+b2.
  static std::vector<BranchSet> AllCombinations();

  std::size_t count() const { return time + b1 + b2; }
  bool empty() const { return count() == 0; }
  std::string Key() const;  // e.g. "time+b1+b2"
  bool operator==(const BranchSet&) const = default;
};

struct ModelConfig {
  BranchSet branches = BranchSet::All();
  HeadKind head = HeadKind::kClass3;
  std::size_t mdrb_filters = 32;
  TcnConfig tcn;
  MdrbMode mdrb_mode = MdrbMode::kCombined;
  std::size_t window = kDefaultWindow;
  std::uint64_t seed = 1;

  void Validate() const;
  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json& j);
};

// Per-feature standardization constants fitted on training windows.
// Spectral entries are indexed [bin * 14 + channel] over log10(psd + 1e-12).
struct NormalizationStats {
  std::vector<double> time_mean, time_std;
  std::vector<double> b1_mean, b1_std;
  std::vector<double> b2_mean, b2_std;

  static NormalizationStats Identity();
  nlohmann::json ToJson() const;
  static NormalizationStats FromJson(const nlohmann::json& j);
};

NormalizationStats ComputeNormalization(std::span<const Window> windows);

// Network inputs for one window. Unused branches are left undefined.
struct Features {
  ad::Tensor time;      // [W, 14]
  ad::Tensor block_b1;  // [6, 6, 22, 1]
  ad::Tensor block_b2;  // [6, 6, 44, 1]
};

Features ExtractFeatures(const Matrix& window, const NormalizationStats& norm,
                         BranchSet needed = BranchSet::All());

class FusionModel {
 public:
  const ModelConfig& config() const { return config_; }
  const NormalizationStats& normalization() const { return norm_; }
  void set_normalization(NormalizationStats norm) { norm_ = std::move(norm); }

  const std::optional<TcnBranch>& time_branch() const { return time_; }
  const std::optional<FreqBranch>& b1_branch() const { return b1_; }
  const std::optional<FreqBranch>& b2_branch() const { return b2_; }

  // Post-activation output of every present branch, in Time, B1, B2 order.
  std::vector<ad::Tensor> BranchPredictions(const Features& features) const;
  // Mean of BranchPredictions: a 3-vector of probabilities or a 1-vector.
  ad::Tensor Forward(const Features& features) const;
  ad::Tensor Forward(const Matrix& window) const;

  ParamList Params() const;
  std::vector<ad::Tensor> ParamTensors() const;

  // Deep copy keeping only `subset` (which must be covered by this model).
  FusionModel WithBranches(BranchSet subset) const;
  FusionModel Clone() const { return WithBranches(config_.branches); }
  void SetMdrbMode(MdrbMode mode);

 private:
  friend FusionModel BuildModel(const ModelConfig& config);
  ModelConfig config_;
  NormalizationStats norm_ = NormalizationStats::Identity();
  std::optional<TcnBranch> time_;
  std::optional<FreqBranch> b1_;
  std::optional<FreqBranch> b2_;
};

// Parameters drawn in Time, B1, B2 order from `config.seed`. Throws
// ConfigError for an empty branch set.
FusionModel BuildModel(const ModelConfig& config);

// Index of the largest value; ties resolve to the lowest index.
int ArgmaxLowest(std::span<const double> values);

int PredictClass(const FusionModel& model, const Features& features);
int PredictClass(const FusionModel& model, const Matrix& window);
double PredictLevel(const FusionModel& model, const Features& features);
double PredictLevel(const FusionModel& model, const Matrix& window);

// dir/model.bin + dir/model.json (tensors) and dir/model_config.json
// (architecture and normalization).
void SaveModel(const FusionModel& model, const std::filesystem::path& dir);
FusionModel LoadModel(const std::filesystem::path& dir);

}  // namespace mwl

#endif  // MWL_MODEL_HPP_
