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

#include "mwl/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <memory>

#include "mwl/checkpoint.hpp"
#include "mwl/error.hpp"
#include "mwl/ops.hpp"
#include "mwl/spectral.hpp"

namespace mwl {

using ad::Tensor;
using nlohmann::json;

namespace {

constexpr double kLogFloor = 1e-12;
constexpr double kMinStd = 1e-12;

// Running mean / variance per element (Welford).
class RunningStats {
 public:
  explicit RunningStats(std::size_t n) : mean_(n, 0.0), m2_(n, 0.0) {}
  void Add(std::span<const double> x) {
    ++count_;
    const double c = static_cast<double>(count_);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double delta = x[i] - mean_[i];
      mean_[i] += delta / c;
      m2_[i] += delta * (x[i] - mean_[i]);
    }
  }
  std::vector<double> Mean() const { return mean_; }
  std::vector<double> Std() const {
    std::vector<double> s(m2_.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = count_ ? std::sqrt(m2_[i] / static_cast<double>(count_)) : 1.0;
    }
    return s;
  }

 private:
  std::size_t count_ = 0;
  std::vector<double> mean_, m2_;
};

std::vector<double> LogBandPower(const Matrix& window, std::size_t nfft) {
  const PsdFrame frame = ExtractBands(WelchPsd(window, nfft));
  std::vector<double> out(frame.values.data().begin(), frame.values.data().end());
  for (auto& v : out) v = std::log10(v + kLogFloor);
  return out;
}

Tensor BlockTensor(const Matrix& window, std::size_t nfft,
                   std::span<const double> mean, std::span<const double> sd) {
  PsdFrame frame = ExtractBands(WelchPsd(window, nfft));
  auto values = frame.values.data();
  if (values.size() != mean.size() || values.size() != sd.size()) {
    throw ConfigError("normalization statistics do not match the " +
                      std::to_string(nfft) + "-point spectrum layout");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double s = sd[i] > kMinStd ? sd[i] : 1.0;
    values[i] = (std::log10(values[i] + kLogFloor) - mean[i]) / s;
  }
  Block3D block = BuildBlock3d(frame);
  const std::size_t depth = block.depth();
  return Tensor::FromValues({kGridSize, kGridSize, depth, 1}, std::move(block.values));
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

BranchSet BranchSet::Parse(std::string_view text) {
  BranchSet set;
  const std::string s = Lower(text);
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t j = s.find_first_of(",+ ", i);
    const std::string token = s.substr(i, j == std::string::npos ? j : j - i);
    if (token == "time") {
      set.time = true;
    } else if (token == "b1") {
      set.b1 = true;
    } else if (token == "b2") {
      set.b2 = true;
    } else if (token == "all") {
      set = All();
    } else if (!token.empty()) {
      throw ConfigError("unknown branch '" + token + "' (expected time, b1, b2)");
    }
    if (j == std::string::npos) break;
    i = j + 1;
  }
  return set;
}

std::vector<BranchSet> BranchSet::AllCombinations() {
  return {{true, false, false}, {false, true, false}, {false, false, true},
          {true, true, false},  {true, false, true},  {false, true, true},
          {true, true, true}};
}

std::string BranchSet::Key() const {
  std::string key;
  auto add = [&key](const char* name) {
    if (!key.empty()) key += '+';
    key += name;
  };
  if (time) add("time");
  if (b1) add("b1");
  if (b2) add("b2");
  return key.empty() ? "none" : key;
}

void ModelConfig::Validate() const {
  if (branches.empty()) throw ConfigError("model needs at least one branch");
  if (mdrb_filters == 0) throw ConfigError("mdrb_filters must be >= 1");
  if (window < kB2Nfft && (branches.b1 || branches.b2)) {
    throw ConfigError("window of " + std::to_string(window) +
                      " samples is shorter than the spectral FFT length");
  }
  if (window == 0) throw ConfigError("window must be >= 1");
  tcn.Validate();
}

json ModelConfig::ToJson() const {
  return {{"branches", branches.Key()},
          {"head", HeadKindName(head)},
          {"mdrb_filters", mdrb_filters},
          {"mdrb_mode", MdrbModeName(mdrb_mode)},
          {"tcn",
           {{"kernel", tcn.kernel},
            {"filters", tcn.filters},
            {"stacks", tcn.stacks},
            {"dilations", tcn.dilations}}},
          {"window", window},
          {"seed", seed}};
}

ModelConfig ModelConfig::FromJson(const json& j) {
  ModelConfig c;
  try {
    c.branches = BranchSet::Parse(j.at("branches").get<std::string>());
    c.head = ParseHeadKind(j.at("head").get<std::string>());
    c.mdrb_filters = j.at("mdrb_filters").get<std::size_t>();
    c.mdrb_mode = ParseMdrbMode(j.at("mdrb_mode").get<std::string>());
    const auto& t = j.at("tcn");
    c.tcn.kernel = t.at("kernel").get<std::size_t>();
    c.tcn.filters = t.at("filters").get<std::size_t>();
    c.tcn.stacks = t.at("stacks").get<std::size_t>();
    c.tcn.dilations = t.at("dilations").get<std::vector<std::size_t>>();
    c.window = j.at("window").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  c.Validate();
  return c;
}

NormalizationStats NormalizationStats::Identity() {
  NormalizationStats n;
  const std::size_t k1 = 22 * kNumChannels, k2 = 44 * kNumChannels;
  n.time_mean.assign(kNumChannels, 0.0);
  n.time_std.assign(kNumChannels, 1.0);
  n.b1_mean.assign(k1, 0.0);
  n.b1_std.assign(k1, 1.0);
  n.b2_mean.assign(k2, 0.0);
  n.b2_std.assign(k2, 1.0);
  return n;
}

json NormalizationStats::ToJson() const {
  return {{"time_mean", time_mean}, {"time_std", time_std},
          {"b1_mean", b1_mean},     {"b1_std", b1_std},
          {"b2_mean", b2_mean},     {"b2_std", b2_std}};
}

NormalizationStats NormalizationStats::FromJson(const json& j) {
  NormalizationStats n;
  try {
    n.time_mean = j.at("time_mean").get<std::vector<double>>();
    n.time_std = j.at("time_std").get<std::vector<double>>();
    n.b1_mean = j.at("b1_mean").get<std::vector<double>>();
    n.b1_std = j.at("b1_std").get<std::vector<double>>();
    n.b2_mean = j.at("b2_mean").get<std::vector<double>>();
    n.b2_std = j.at("b2_std").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("normalization statistics: ") + e.what());
  }
  return n;
}

NormalizationStats ComputeNormalization(std::span<const Window> windows) {
  if (windows.empty()) {
    throw ValidationError("normalization needs at least one window");
  }
  RunningStats time(kNumChannels);
  std::unique_ptr<RunningStats> b1, b2;
  for (const auto& w : windows) {
    for (std::size_t r = 0; r < w.data.rows(); ++r) time.Add(w.data.row(r));
    const auto p1 = LogBandPower(w.data, kB1Nfft);
    const auto p2 = LogBandPower(w.data, kB2Nfft);
    if (!b1) {
      b1 = std::make_unique<RunningStats>(p1.size());
      b2 = std::make_unique<RunningStats>(p2.size());
    }
    b1->Add(p1);
    b2->Add(p2);
  }
  NormalizationStats n;
  n.time_mean = time.Mean();
  n.time_std = time.Std();
  n.b1_mean = b1->Mean();
  n.b1_std = b1->Std();
  n.b2_mean = b2->Mean();
  n.b2_std = b2->Std();
  return n;
}

Features ExtractFeatures(const Matrix& window, const NormalizationStats& norm,
                         BranchSet needed) {
  if (window.cols() != kNumChannels) {
    throw ValidationError("window has " + std::to_string(window.cols()) +
                          " channels, expected 14");
  }
  Features f;
  if (needed.time) {
    if (norm.time_mean.size() != kNumChannels || norm.time_std.size() != kNumChannels) {
      throw ConfigError("time normalization statistics must have 14 entries");
    }
    std::vector<double> v(window.data().begin(), window.data().end());
    for (std::size_t r = 0; r < window.rows(); ++r) {
      for (std::size_t c = 0; c < kNumChannels; ++c) {
        const double s = norm.time_std[c] > kMinStd ? norm.time_std[c] : 1.0;
        v[r * kNumChannels + c] = (v[r * kNumChannels + c] - norm.time_mean[c]) / s;
      }
    }
    f.time = Tensor::FromValues({window.rows(), kNumChannels}, std::move(v));
  }
  if (needed.b1) f.block_b1 = BlockTensor(window, kB1Nfft, norm.b1_mean, norm.b1_std);
  if (needed.b2) f.block_b2 = BlockTensor(window, kB2Nfft, norm.b2_mean, norm.b2_std);
  return f;
}

FusionModel BuildModel(const ModelConfig& config) {
  config.Validate();
  FusionModel m;
  m.config_ = config;
  Initializer init(config.seed);
  if (config.branches.time) {
    m.time_.emplace(config.tcn, kNumChannels, config.head, init);
  }
  const std::size_t k1 = 22, k2 = 44;
  if (config.branches.b1) {
    m.b1_.emplace(k1, config.mdrb_filters, config.head, init, config.mdrb_mode);
  }
  if (config.branches.b2) {
    m.b2_.emplace(k2, config.mdrb_filters, config.head, init, config.mdrb_mode);
  }
  return m;
}

std::vector<Tensor> FusionModel::BranchPredictions(const Features& f) const {
  std::vector<Tensor> preds;
  auto need = [](const Tensor& t, const char* what) {
    if (!t.defined()) {
      throw ValidationError(std::string("features lack the ") + what + " input");
    }
  };
  if (time_) {
    need(f.time, "time");
    if (f.time.dim(0) != config_.window) {
      throw ValidationError("window has " + std::to_string(f.time.dim(0)) +
                            " samples, model expects " +
                            std::to_string(config_.window));
    }
    preds.push_back(time_->Forward(f.time));
  }
  if (b1_) {
    need(f.block_b1, "B1 block");
    preds.push_back(b1_->Forward(f.block_b1));
  }
  if (b2_) {
    need(f.block_b2, "B2 block");
    preds.push_back(b2_->Forward(f.block_b2));
  }
  return preds;
}

Tensor FusionModel::Forward(const Features& features) const {
  const auto preds = BranchPredictions(features);
  return preds.size() == 1 ? preds.front() : ad::Mean(preds);
}

Tensor FusionModel::Forward(const Matrix& window) const {
  return Forward(ExtractFeatures(window, norm_, config_.branches));
}

ParamList FusionModel::Params() const {
  ParamList out;
  if (time_) time_->CollectParams("time", out);
  if (b1_) b1_->CollectParams("b1", out);
  if (b2_) b2_->CollectParams("b2", out);
  return out;
}

std::vector<Tensor> FusionModel::ParamTensors() const {
  std::vector<Tensor> out;
  for (auto& p : Params()) out.push_back(p.tensor);
  return out;
}

FusionModel FusionModel::WithBranches(BranchSet subset) const {
  if ((subset.time && !time_) || (subset.b1 && !b1_) || (subset.b2 && !b2_)) {
    throw ConfigError("branch set " + subset.Key() + " is not a subset of " +
                      config_.branches.Key());
  }
  ModelConfig cfg = config_;
  cfg.branches = subset;
  FusionModel copy = BuildModel(cfg);
  copy.norm_ = norm_;
  ParamList source = Params();
  ParamList target = copy.Params();
  std::erase_if(source, [&](const ad::NamedTensor& nt) {
    return std::none_of(target.begin(), target.end(),
                        [&](const ad::NamedTensor& t) { return t.name == nt.name; });
  });
  ad::AssignByName(source, target);
  return copy;
}

void FusionModel::SetMdrbMode(MdrbMode mode) {
  config_.mdrb_mode = mode;
  if (b1_) b1_->set_mode(mode);
  if (b2_) b2_->set_mode(mode);
}

int ArgmaxLowest(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

int PredictClass(const FusionModel& model, const Features& features) {
  if (model.config().head != HeadKind::kClass3) {
    throw ConfigError("class prediction needs a class3 model");
  }
  ad::NoGradGuard no_grad;
  return ArgmaxLowest(model.Forward(features).values());
}

int PredictClass(const FusionModel& model, const Matrix& window) {
  return PredictClass(model, ExtractFeatures(window, model.normalization(),
                                             model.config().branches));
}

double PredictLevel(const FusionModel& model, const Features& features) {
  if (model.config().head != HeadKind::kCont) {
    throw ConfigError("level prediction needs a cont model");
  }
  ad::NoGradGuard no_grad;
  return model.Forward(features).item();
}

double PredictLevel(const FusionModel& model, const Matrix& window) {
  return PredictLevel(model, ExtractFeatures(window, model.normalization(),
                                             model.config().branches));
}

void SaveModel(const FusionModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const ParamList params = model.Params();
  ad::SaveCheckpoint(dir / "model", params);
  std::ofstream out(dir / "model_config.json");
  if (!out) throw IoError("cannot write " + (dir / "model_config.json").string());
  out << json{{"format", "mwl-model-v1"},
              {"config", model.config().ToJson()},
              {"normalization", model.normalization().ToJson()}}
             .dump(2)
      << '\n';
}

FusionModel LoadModel(const std::filesystem::path& dir) {
  const auto cfg_path = dir / "model_config.json";
  std::ifstream in(cfg_path);
  if (!in) throw IoError("cannot open " + cfg_path.string());
  json meta, config_json, norm_json;
  try {
    in >> meta;
    config_json = meta.at("config");
    norm_json = meta.at("normalization");
  } catch (const json::exception& e) {
    throw ParseError(cfg_path.string() + ": " + e.what());
  }
  FusionModel model = BuildModel(ModelConfig::FromJson(config_json));
  model.set_normalization(NormalizationStats::FromJson(norm_json));
  const auto loaded = ad::LoadCheckpoint(dir / "model");
  ParamList targets = model.Params();
  ad::AssignByName(loaded, targets);
  return model;
}

}  // namespace mwl
