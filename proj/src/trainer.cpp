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

#include "mwl/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <iterator>
#include <limits>
#include <map>
#include <random>

#include "mwl/error.hpp"
#include "mwl/ops.hpp"
#include "mwl/optim.hpp"

namespace mwl {

using ad::Tensor;
using nlohmann::json;

namespace {

Tensor SampleLoss(const Tensor& pred, const LabelBundle& label, HeadKind head) {
  if (head == HeadKind::kClass3) {
    std::vector<double> onehot(3, 0.0);
    onehot[static_cast<std::size_t>(label.class_id)] = 1.0;
    const Tensor rows[] = {pred};
    return ad::CrossEntropy(ad::Stack(rows),
                            Tensor::FromValues({1, 3}, std::move(onehot)));
  }
  return ad::Mse(pred, Tensor::FromValues({1}, {label.y_cont}));
}

std::vector<std::vector<double>> Snapshot(const std::vector<Tensor>& params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.values().begin(), p.values().end());
  return out;
}

void Restore(std::vector<Tensor>& params, const std::vector<std::vector<double>>& snap) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::copy(snap[i].begin(), snap[i].end(), params[i].mutable_values().begin());
  }
}

std::string FormatFixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

json OptionalJson(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::vector<Sample> PrepareSamples(std::span<const Window> windows,
                                   const NormalizationStats& norm,
                                   BranchSet needed) {
  std::vector<Sample> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    out.push_back({ExtractFeatures(w.data, norm, needed), w.label});
  }
  return out;
}

double TrainConfig::DefaultLr(HeadKind head) {
  return head == HeadKind::kClass3 ? 1e-3 : 1e-4;
}

void TrainConfig::Validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be finite and >= 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
}

json TrainConfig::ToJson() const {
  return {{"epochs", epochs},
          {"lr", lr},
          {"batch_size", batch_size},
          {"patience", patience},
          {"seed", seed}};
}

json History::ToJson() const {
  json epochs_json = json::array();
  for (const auto& e : epochs) {
    epochs_json.push_back(
        {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}});
  }
  return {{"epochs", epochs_json},
          {"best_epoch", best_epoch},
          {"best_val_loss", best_val_loss},
          {"stopped_early", stopped_early},
          {"selected_on_train", selected_on_train}};
}

double MeanLoss(const FusionModel& model, std::span<const Sample> samples) {
  if (samples.empty()) throw ValidationError("loss over an empty sample set");
  ad::NoGradGuard no_grad;
  double sum = 0.0;
  for (const auto& s : samples) {
    sum += SampleLoss(model.Forward(s.features), s.label, model.config().head).item();
  }
  return sum / static_cast<double>(samples.size());
}

History Train(FusionModel& model, std::span<const Sample> train,
              std::span<const Sample> val, const TrainConfig& config,
              const std::function<void(const EpochRecord&)>& on_epoch) {
  config.Validate();
  if (train.empty()) throw ValidationError("training set is empty");

  const HeadKind head = model.config().head;
  std::vector<Tensor> params = model.ParamTensors();
  ad::AdamState state;
  const ad::AdamOptions adam{.lr = config.lr};
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  History history;
  history.selected_on_train = val.empty();
  auto best = Snapshot(params);
  double best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng() % (i + 1)]);
    }
    double sum = 0.0;
    try {
      for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
        const std::size_t end = std::min(order.size(), begin + config.batch_size);
        const double inv = 1.0 / static_cast<double>(end - begin);
        ad::ZeroGrads(params);
        for (std::size_t k = begin; k < end; ++k) {
          const Sample& s = train[order[k]];
          Tensor loss = SampleLoss(model.Forward(s.features), s.label, head);
          sum += loss.item();
          ad::Scale(loss, inv).Backward();
        }
        ad::AdamStep(params, state, adam);
      }
    } catch (const NumericError& e) {
      throw TrainingError("training diverged in epoch " + std::to_string(epoch) +
                              ": " + e.what(),
                          epoch);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = sum / static_cast<double>(train.size());
    try {
      rec.val_loss = val.empty() ? rec.train_loss : MeanLoss(model, val);
    } catch (const NumericError& e) {
      throw TrainingError("validation diverged in epoch " + std::to_string(epoch) +
                              ": " + e.what(),
                          epoch);
    }
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss)) {
      throw TrainingError("non-finite loss in epoch " + std::to_string(epoch), epoch);
    }
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val_loss < best_loss) {
      best_loss = rec.val_loss;
      history.best_epoch = epoch;
      best = Snapshot(params);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      history.stopped_early = epoch < config.epochs;
      break;
    }
  }
  Restore(params, best);
  history.best_val_loss = best_loss;
  return history;
}

double Accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.empty() || predictions.size() != labels.size()) {
    throw ValidationError("accuracy needs equal-length, non-empty inputs");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

CccResult Ccc(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size() || predictions.size() < 2) {
    throw ValidationError("CCC needs two equal-length sequences of at least 2 values");
  }
  const double n = static_cast<double>(labels.size());
  // Means are taken relative to the first element so that a constant
  // sequence centres to exact zeros.
  auto shifted_mean = [n](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x - v[0];
    return v[0] + s / n;
  };
  const double mp = shifted_mean(predictions);
  const double my = shifted_mean(labels);
  double vp = 0.0, vy = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double dp = predictions[i] - mp;
    const double dy = labels[i] - my;
    vp += dp * dp;
    vy += dy * dy;
    cov += dp * dy;
  }
  vp /= n;
  vy /= n;
  cov /= n;
  const double denom = vp + vy + (mp - my) * (mp - my);
  if (denom == 0.0) return {0.0, true};
  return {2.0 * cov / denom, false};
}

json EvalReport::ToJson() const {
  json conf = json::array();
  for (const auto& row : confusion) conf.push_back(row);
  json j{{"task", HeadKindName(task)},
         {"n_samples", n_samples},
         {"accuracy", OptionalJson(accuracy)},
         {"ccc", OptionalJson(ccc)}};
  if (task == HeadKind::kClass3) {
    j["confusion"] = conf;
    j["recall"] = {OptionalJson(recall[0]), OptionalJson(recall[1]),
                   OptionalJson(recall[2])};
  } else {
    j["ccc_degenerate"] = ccc_degenerate;
  }
  return j;
}

std::string EvalReport::ToCsv() const {
  std::string out;
  if (task == HeadKind::kClass3) {
    out = "task,n_samples,accuracy,recall_low,recall_mid,recall_high\n";
    out += "class3," + std::to_string(n_samples) + "," + FormatFixed(accuracy.value_or(0));
    for (const auto& r : recall) out += "," + (r ? FormatFixed(*r) : std::string());
    out += "\n";
  } else {
    out = "task,n_samples,ccc\n";
    out += "cont," + std::to_string(n_samples) + "," + FormatFixed(ccc.value_or(0)) + "\n";
  }
  return out;
}

EvalReport Evaluate(const FusionModel& model, std::span<const Sample> samples,
                    HeadKind task) {
  if (task != model.config().head) {
    throw ConfigError("cannot evaluate task " + std::string(HeadKindName(task)) +
                      " with a " + std::string(HeadKindName(model.config().head)) +
                      " model");
  }
  if (samples.empty()) throw ValidationError("evaluation set is empty");
  EvalReport report;
  report.task = task;
  report.n_samples = samples.size();
  if (task == HeadKind::kClass3) {
    std::vector<int> preds, labels;
    for (const auto& s : samples) {
      const int p = PredictClass(model, s.features);
      preds.push_back(p);
      labels.push_back(s.label.class_id);
      ++report.confusion[static_cast<std::size_t>(s.label.class_id)]
                        [static_cast<std::size_t>(p)];
    }
    report.accuracy = Accuracy(preds, labels);
    for (std::size_t c = 0; c < 3; ++c) {
      std::size_t support = 0;
      for (auto v : report.confusion[c]) support += v;
      if (support) {
        report.recall[c] = static_cast<double>(report.confusion[c][c]) /
                           static_cast<double>(support);
      }
    }
  } else {
    std::vector<double> preds, labels;
    for (const auto& s : samples) {
      preds.push_back(PredictLevel(model, s.features));
      labels.push_back(s.label.y_cont);
    }
    if (samples.size() >= 2) {
      const CccResult r = Ccc(preds, labels);
      report.ccc = r.value;
      report.ccc_degenerate = r.degenerate;
    }
  }
  return report;
}

namespace {

struct ShiftSamples {
  std::vector<Sample> train, val, test;
};

std::vector<Window> WindowAll(std::span<const EegRecord> records, std::size_t w,
                              std::size_t shift) {
  std::vector<Window> out;
  for (const auto& r : records) {
    auto ws = MakeWindows(r, w, shift);
    std::move(ws.begin(), ws.end(), std::back_inserter(out));
  }
  return out;
}

ShiftSamples PrepareShift(const AblationData& data, std::size_t shift) {
  const auto train_w = WindowAll(data.train, data.window, shift);
  if (train_w.empty()) {
    throw ValidationError("no training windows at shift " + std::to_string(shift));
  }
  const NormalizationStats norm = ComputeNormalization(train_w);
  ShiftSamples s;
  s.train = PrepareSamples(train_w, norm);
  s.val = PrepareSamples(WindowAll(data.val, data.window, data.eval_shift), norm);
  s.test = PrepareSamples(WindowAll(data.test, data.window, data.eval_shift), norm);
  return s;
}

AblationCell RunCellOn(const ShiftSamples& s, BranchSet branches, MdrbMode mode,
                       std::size_t shift, const AblationOptions& options) {
  AblationCell cell;
  cell.shift = shift;
  for (HeadKind head : {HeadKind::kClass3, HeadKind::kCont}) {
    ModelConfig cfg = options.model;
    cfg.branches = branches;
    cfg.head = head;
    cfg.mdrb_mode = mode;
    FusionModel model = BuildModel(cfg);
    const TrainConfig& tc =
        head == HeadKind::kClass3 ? options.class_train : options.cont_train;
    Train(model, s.train, s.val, tc);
    const EvalReport report = Evaluate(model, s.test, head);
    if (head == HeadKind::kClass3) {
      cell.accuracy = report.accuracy.value_or(0.0);
    } else {
      cell.ccc = report.ccc.value_or(0.0);
      cell.ccc_degenerate = report.ccc_degenerate || !report.ccc;
    }
  }
  return cell;
}

std::string WideCsv(const char* key, const std::vector<std::string>& rows,
                    const std::vector<std::size_t>& shifts,
                    const std::vector<AblationCell>& cells) {
  std::string out = key;
  for (auto s : shifts) {
    out += ",acc_" + std::to_string(s) + ",ccc_" + std::to_string(s);
  }
  out += "\n";
  for (const auto& row : rows) {
    out += row;
    for (auto s : shifts) {
      const auto it = std::find_if(cells.begin(), cells.end(), [&](const AblationCell& c) {
        return c.row == row && c.shift == s;
      });
      if (it == cells.end()) {
        out += ",,";
      } else {
        out += "," + FormatFixed(it->accuracy) + "," + FormatFixed(it->ccc);
      }
    }
    out += "\n";
  }
  return out;
}

json TableJson(const std::vector<std::string>& rows,
               const std::vector<AblationCell>& cells) {
  json table = json::array();
  for (const auto& row : rows) {
    json entry{{"row", row}, {"cells", json::array()}};
    for (const auto& c : cells) {
      if (c.row != row) continue;
      entry["cells"].push_back({{"shift", c.shift},
                                {"accuracy", c.accuracy},
                                {"ccc", c.ccc},
                                {"ccc_degenerate", c.ccc_degenerate}});
    }
    table.push_back(entry);
  }
  return table;
}

}  // namespace

AblationCell RunAblationCell(const AblationData& data, BranchSet branches,
                             MdrbMode mode, std::size_t shift,
                             const AblationOptions& options) {
  const ShiftSamples s = PrepareShift(data, shift);
  AblationCell cell = RunCellOn(s, branches, mode, shift, options);
  cell.row = branches.Key();
  return cell;
}

AblationResult RunAblation(const AblationData& data,
                           const AblationOptions& options) {
  if (options.branch_sets.empty() || options.shifts.empty()) {
    throw ConfigError("ablation needs at least one branch set and one shift");
  }
  AblationResult result;
  result.shifts = options.shifts;
  for (const auto& b : options.branch_sets) result.branch_rows.push_back(b.Key());
  if (options.mdrb_sweep) {
    for (MdrbMode m : {MdrbMode::kBranch1, MdrbMode::kBranch2, MdrbMode::kCombined}) {
      result.mdrb_rows.emplace_back(MdrbModeName(m));
    }
  }

  auto say = [&](const std::string& msg) {
    if (options.progress) options.progress(msg);
  };
  for (std::size_t shift : options.shifts) {
    const ShiftSamples samples = PrepareShift(data, shift);
    std::map<std::string, AblationCell> done;
    for (const auto& branches : options.branch_sets) {
      say("shift " + std::to_string(shift) + " branches " + branches.Key());
      AblationCell cell = RunCellOn(samples, branches, options.model.mdrb_mode,
                                    shift, options);
      cell.row = branches.Key();
      done[cell.row] = cell;
      result.branch_cells.push_back(cell);
    }
    if (!options.mdrb_sweep) continue;
    for (MdrbMode mode : {MdrbMode::kBranch1, MdrbMode::kBranch2, MdrbMode::kCombined}) {
      AblationCell cell;
      const auto full = done.find(BranchSet::All().Key());
      if (mode == options.model.mdrb_mode && full != done.end()) {
        // Identical configuration and seed: the branch sweep already ran it.
        cell = full->second;
      } else {
        say("shift " + std::to_string(shift) + " mdrb " + std::string(MdrbModeName(mode)));
        cell = RunCellOn(samples, BranchSet::All(), mode, shift, options);
      }
      cell.row = MdrbModeName(mode);
      result.mdrb_cells.push_back(cell);
    }
  }
  return result;
}

json AblationResult::ToJson() const {
  return {{"shifts", shifts},
          {"branch_table", TableJson(branch_rows, branch_cells)},
          {"mdrb_table", TableJson(mdrb_rows, mdrb_cells)}};
}

std::string AblationResult::BranchCsv() const {
  return WideCsv("branches", branch_rows, shifts, branch_cells);
}

std::string AblationResult::MdrbCsv() const {
  return WideCsv("mdrb_mode", mdrb_rows, shifts, mdrb_cells);
}

}  // namespace mwl
