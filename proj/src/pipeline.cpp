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

#include "mwl/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <regex>

#include "mwl/error.hpp"
#include "mwl/model.hpp"
#include "mwl/spectral.hpp"
#include "mwl/trainer.hpp"

namespace mwl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Setter = std::function<void(const json&, RunConfig&)>;

template <typename T>
Setter Field(T RunConfig::*member) {
  return [member](const json& v, RunConfig& c) { c.*member = v.get<T>(); };
}

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> table = {
      {"data", Field(&RunConfig::data)},
      {"ratings", Field(&RunConfig::ratings)},
      {"adapter",
       [](const json& v, RunConfig& c) { c.adapter = ParseAdapter(v.get<std::string>()); }},
      {"trim_seconds", Field(&RunConfig::trim_seconds)},
      {"dataset", Field(&RunConfig::dataset)},
      {"checkpoint", Field(&RunConfig::checkpoint)},
      {"recording", Field(&RunConfig::recording)},
      {"window", Field(&RunConfig::window)},
      {"shift", Field(&RunConfig::shift)},
      {"train_fraction", Field(&RunConfig::train_fraction)},
      {"val_fraction", Field(&RunConfig::val_fraction)},
      {"branches", Field(&RunConfig::branches)},
      {"head",
       [](const json& v, RunConfig& c) {
         if (v.is_null()) {
           c.head.reset();
         } else {
           c.head = ParseHeadKind(v.get<std::string>());
         }
       }},
      {"mdrb_mode",
       [](const json& v, RunConfig& c) { c.mdrb_mode = ParseMdrbMode(v.get<std::string>()); }},
      {"mdrb_filters", Field(&RunConfig::mdrb_filters)},
      {"tcn_filters",
       [](const json& v, RunConfig& c) { c.tcn.filters = v.get<std::size_t>(); }},
      {"tcn_kernel",
       [](const json& v, RunConfig& c) { c.tcn.kernel = v.get<std::size_t>(); }},
      {"tcn_stacks",
       [](const json& v, RunConfig& c) { c.tcn.stacks = v.get<std::size_t>(); }},
      {"tcn_dilations",
       [](const json& v, RunConfig& c) {
         c.tcn.dilations = v.get<std::vector<std::size_t>>();
       }},
      {"epochs", Field(&RunConfig::epochs)},
      {"lr",
       [](const json& v, RunConfig& c) {
         if (v.is_null()) {
           c.lr.reset();
         } else {
           c.lr = v.get<double>();
         }
       }},
      {"batch", Field(&RunConfig::batch)},
      {"patience", Field(&RunConfig::patience)},
      {"seed", Field(&RunConfig::seed)},
      {"split", Field(&RunConfig::split)},
      {"csv", Field(&RunConfig::csv)},
      {"participants", Field(&RunConfig::participants)},
      {"seconds", Field(&RunConfig::seconds)},
      {"separability", Field(&RunConfig::separability)},
      {"unrated", Field(&RunConfig::unrated)},
      {"shifts", Field(&RunConfig::shifts)},
      {"ablation_branches", Field(&RunConfig::ablation_branches)},
      {"mdrb_sweep", Field(&RunConfig::mdrb_sweep)},
      {"eval_shift", Field(&RunConfig::eval_shift)},
      {"nfft", Field(&RunConfig::nfft)},
      {"window_index", Field(&RunConfig::window_index)},
      {"out", Field(&RunConfig::out)},
      {"verbose", Field(&RunConfig::verbose)},
  };
  return table;
}

void Log(const RunConfig& c, const std::string& msg) {
  if (c.verbose) std::cerr << "mwl: " << msg << "\n";
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void WriteJson(const fs::path& path, const json& j) {
  WriteText(path, j.dump(2) + "\n");
}

json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string Iso8601Now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RecordingName(int id, Task task, Adapter adapter) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "sub%02d_%s.%s", id,
                task == Task::kRest ? "lo" : "hi",
                adapter == Adapter::kCsv ? "csv" : "txt");
  return buf;
}

struct RecordingFile {
  std::string name;
  int participant_id = 0;
  Task task = Task::kRest;
};

std::vector<RecordingFile> DiscoverRecordings(const fs::path& dir, Adapter adapter) {
  if (!fs::is_directory(dir)) throw IoError("data directory not found: " + dir.string());
  const std::regex pattern(adapter == Adapter::kCsv ? R"(sub(\d+)_(lo|hi)\.csv)"
                                                    : R"(sub(\d+)_(lo|hi)\.txt)");
  std::vector<RecordingFile> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (!entry.is_regular_file() || !std::regex_match(name, m, pattern)) continue;
    files.push_back({name, std::stoi(m[1].str()), ParseTask(m[2].str())});
  }
  if (files.empty()) {
    throw IoError("no recordings matching subNN_lo/hi found in " + dir.string());
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return std::pair(a.participant_id, a.task) < std::pair(b.participant_id, b.task);
  });
  return files;
}

std::vector<Window> WindowAll(std::span<const EegRecord> records, std::size_t w,
                              std::size_t shift, WindowingStats* stats = nullptr) {
  std::vector<Window> out;
  for (const auto& r : records) {
    auto ws = MakeWindows(r, w, shift, stats);
    std::move(ws.begin(), ws.end(), std::back_inserter(out));
  }
  return out;
}

// What train, eval and ablation need from a preprocessed dataset.
struct Dataset {
  fs::path data_dir;
  Adapter adapter = Adapter::kStewRaw;
  double trim_seconds = 0.0;
  std::size_t window = kDefaultWindow;
  std::size_t shift = kDefaultShift;
  NormalizationStats normalization;
  json records;
};

Dataset OpenDataset(const std::string& dir) {
  if (dir.empty()) throw ValidationError("no dataset directory given (--dataset)");
  const fs::path path = fs::path(dir) / "manifest.json";
  const json m = ReadJson(path);
  Dataset ds;
  try {
    ds.data_dir = m.at("data_dir").get<std::string>();
    ds.adapter = ParseAdapter(m.at("adapter").get<std::string>());
    ds.trim_seconds = m.at("trim_seconds").get<double>();
    ds.window = m.at("window").get<std::size_t>();
    ds.shift = m.at("shift").get<std::size_t>();
    ds.records = m.at("records");
    ds.normalization = NormalizationStats::FromJson(m.at("normalization"));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return ds;
}

// Loads only the recordings assigned to `split`; other files are not opened.
std::vector<EegRecord> LoadSplit(const Dataset& ds, const std::string& split) {
  std::vector<EegRecord> out;
  for (const auto& r : ds.records) {
    if (r.at("split").get<std::string>() != split) continue;
    EegRecord rec = LoadRecording(ds.data_dir / r.at("file").get<std::string>(),
                                  ds.adapter, ds.trim_seconds);
    rec.participant_id = r.at("participant").get<int>();
    rec.task = ParseTask(r.at("task").get<std::string>());
    rec.rating = r.at("rating").get<int>();
    out.push_back(std::move(rec));
  }
  return out;
}

ModelConfig ModelFromRun(const RunConfig& c, std::size_t window) {
  ModelConfig m;
  m.branches = BranchSet::Parse(c.branches);
  m.head = c.head.value_or(HeadKind::kClass3);
  m.mdrb_filters = c.mdrb_filters;
  m.tcn = c.tcn;
  m.mdrb_mode = c.mdrb_mode;
  m.window = window;
  m.seed = c.seed;
  m.Validate();
  return m;
}

TrainConfig TrainFromRun(const RunConfig& c, HeadKind head) {
  TrainConfig t;
  t.epochs = c.epochs;
  t.lr = c.lr.value_or(TrainConfig::DefaultLr(head));
  t.batch_size = c.batch;
  t.patience = c.patience;
  t.seed = c.seed;
  t.Validate();
  return t;
}

fs::path ResolveCheckpoint(const std::string& path) {
  if (path.empty()) throw ValidationError("no checkpoint given (--checkpoint)");
  const fs::path p(path);
  if (fs::exists(p / "model_config.json")) return p;
  return p / "checkpoint";
}

json ClassCounts(std::span<const std::size_t, 3> counts) {
  return json::array({counts[0], counts[1], counts[2]});
}

}  // namespace

RunConfig RunConfig::FromJson(const json& j) {
  if (!j.is_object()) throw ParseError("run config must be a JSON object");
  RunConfig c;
  const auto& setters = Setters();
  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ParseError("unknown config key '" + key + "'");
    try {
      it->second(value, c);
    } catch (const json::exception& e) {
      throw ParseError("config key '" + key + "': " + e.what());
    }
  }
  c.Validate();
  return c;
}

json RunConfig::ToJson() const {
  return {{"data", data},
          {"ratings", ratings},
          {"adapter", AdapterName(adapter)},
          {"trim_seconds", trim_seconds},
          {"dataset", dataset},
          {"checkpoint", checkpoint},
          {"recording", recording},
          {"window", window},
          {"shift", shift},
          {"train_fraction", train_fraction},
          {"val_fraction", val_fraction},
          {"branches", branches},
          {"head", head ? json(HeadKindName(*head)) : json(nullptr)},
          {"mdrb_mode", MdrbModeName(mdrb_mode)},
          {"mdrb_filters", mdrb_filters},
          {"tcn_filters", tcn.filters},
          {"tcn_kernel", tcn.kernel},
          {"tcn_stacks", tcn.stacks},
          {"tcn_dilations", tcn.dilations},
          {"epochs", epochs},
          {"lr", lr ? json(*lr) : json(nullptr)},
          {"batch", batch},
          {"patience", patience},
          {"seed", seed},
          {"split", split},
          {"csv", csv},
          {"participants", participants},
          {"seconds", seconds},
          {"separability", separability},
          {"unrated", unrated},
          {"shifts", shifts},
          {"ablation_branches", ablation_branches},
          {"mdrb_sweep", mdrb_sweep},
          {"eval_shift", eval_shift},
          {"nfft", nfft},
          {"window_index", window_index},
          {"out", out},
          {"verbose", verbose}};
}

void RunConfig::Validate() const {
  if (window == 0 || shift == 0 || eval_shift == 0) {
    throw ValidationError("window and shifts must be positive");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie in (0, 1)");
  }
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ValidationError("val_fraction must lie in [0, 1)");
  }
  if (trim_seconds < 0.0) throw ValidationError("trim_seconds must be >= 0");
  if (split != "train" && split != "val" && split != "test") {
    throw ValidationError("split must be train, val or test");
  }
  if (shifts.empty() ||
      std::any_of(shifts.begin(), shifts.end(), [](auto s) { return s == 0; })) {
    throw ValidationError("shifts must be a non-empty list of positive values");
  }
  if (participants < 1 || unrated < 0 || unrated > participants || !(seconds > 0.0)) {
    throw ValidationError("invalid synthetic corpus size");
  }
  BranchSet::Parse(branches);
  for (const auto& b : ablation_branches) BranchSet::Parse(b);
  tcn.Validate();
  TrainFromRun(*this, head.value_or(HeadKind::kClass3));
}

json CmdSynth(const RunConfig& c) {
  SyntheticOptions opt;
  opt.n_participants = c.participants;
  opt.seconds = c.seconds;
  opt.seed = c.seed;
  opt.separability = c.separability;
  opt.n_unrated = c.unrated;
  const auto records = GenerateSynthetic(opt);

  const fs::path out(c.out);
  fs::create_directories(out);
  RatingsMap ratings;
  std::vector<int> unrated;
  json files = json::array();
  for (const auto& r : records) {
    const std::string name = RecordingName(r.participant_id, r.task, c.adapter);
    if (c.adapter == Adapter::kCsv) {
      WriteCsvRecording(r, out / name);
    } else {
      WriteStewRecording(r, out / name);
    }
    files.push_back(name);
    if (r.rating) {
      ratings[{r.participant_id, r.task}] = *r.rating;
    } else if (unrated.empty() || unrated.back() != r.participant_id) {
      unrated.push_back(r.participant_id);
    }
  }
  WriteRatings(ratings, unrated, out / "ratings.txt");
  Log(c, "wrote " + std::to_string(records.size()) + " recordings to " + out.string());
  return {{"command", "synth"},
          {"out", out.string()},
          {"participants", c.participants},
          {"unrated", unrated},
          {"files", files}};
}

json CmdPreprocess(const RunConfig& c) {
  const fs::path data_dir = fs::absolute(c.data).lexically_normal();
  const fs::path ratings_path =
      c.ratings.empty() ? data_dir / "ratings.txt" : fs::path(c.ratings);
  const RatingsMap ratings = LoadRatings(ratings_path);
  const auto files = DiscoverRecordings(data_dir, c.adapter);

  json warnings = json::array();
  std::vector<EegRecord> records;
  std::vector<std::string> names;
  std::vector<int> unrated;
  for (const auto& f : files) {
    const auto it = ratings.find({f.participant_id, f.task});
    if (it == ratings.end()) {
      if (unrated.empty() || unrated.back() != f.participant_id) {
        unrated.push_back(f.participant_id);
        warnings.push_back("participant " + std::to_string(f.participant_id) +
                           " has no rating; skipped");
      }
      continue;
    }
    EegRecord rec = LoadRecording(data_dir / f.name, c.adapter, c.trim_seconds);
    rec.participant_id = f.participant_id;
    rec.task = f.task;
    rec.rating = it->second;
    records.push_back(std::move(rec));
    names.push_back(f.name);
  }
  if (records.empty()) throw ValidationError("no rated recordings in " + data_dir.string());

  std::vector<int> ids;
  for (const auto& r : records) ids.push_back(r.participant_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const ParticipantSplit outer = SplitByParticipant(ids, c.train_fraction, c.seed);
  std::vector<int> train_ids = outer.train, val_ids;
  if (c.val_fraction > 0.0 && outer.train.size() >= 2) {
    const ParticipantSplit inner =
        SplitByParticipant(outer.train, 1.0 - c.val_fraction, c.seed + 1);
    train_ids = inner.train;
    val_ids = inner.test;
  }
  auto split_of = [&](int id) -> std::string {
    if (std::binary_search(train_ids.begin(), train_ids.end(), id)) return "train";
    if (std::binary_search(val_ids.begin(), val_ids.end(), id)) return "val";
    return "test";
  };

  json record_entries = json::array();
  std::string csv = "participant,task,start,rating,class_id,y_cont,split\n";
  std::map<std::string, std::array<std::size_t, 3>> split_classes;
  std::map<int, std::array<std::size_t, 3>> participant_classes;
  std::vector<Window> train_windows;
  WindowingStats stats;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const EegRecord& r = records[i];
    const std::string split = split_of(r.participant_id);
    auto windows = MakeWindows(r, c.window, c.shift, &stats);
    if (windows.empty()) {
      warnings.push_back(names[i] + " is shorter than one window (" +
                         std::to_string(r.num_samples()) + " samples)");
    }
    for (const auto& w : windows) {
      char line[160];
      std::snprintf(line, sizeof(line), "%d,%s,%zu,%d,%d,%.17g,%s\n",
                    w.source.participant_id, std::string(TaskName(w.source.task)).c_str(),
                    w.source.start, w.label.rating, w.label.class_id, w.label.y_cont,
                    split.c_str());
      csv += line;
      ++split_classes[split][static_cast<std::size_t>(w.label.class_id)];
      ++participant_classes[r.participant_id][static_cast<std::size_t>(w.label.class_id)];
    }
    record_entries.push_back({{"file", names[i]},
                              {"participant", r.participant_id},
                              {"task", TaskName(r.task)},
                              {"rating", *r.rating},
                              {"samples", r.num_samples()},
                              {"windows", windows.size()},
                              {"split", split}});
    if (split == "train") {
      std::move(windows.begin(), windows.end(), std::back_inserter(train_windows));
    }
  }
  if (train_windows.empty()) throw ValidationError("training split has no windows");
  const NormalizationStats norm = ComputeNormalization(train_windows);

  json per_split = json::object();
  for (const char* s : {"train", "val", "test"}) {
    const auto counts = split_classes[s];
    per_split[s] = {{"windows", counts[0] + counts[1] + counts[2]},
                    {"class_counts", ClassCounts(counts)}};
  }
  json per_participant = json::array();
  for (int id : ids) {
    const auto counts = participant_classes[id];
    per_participant.push_back({{"participant", id},
                               {"split", split_of(id)},
                               {"windows", counts[0] + counts[1] + counts[2]},
                               {"class_counts", ClassCounts(counts)}});
  }
  std::array<std::size_t, 3> total{};
  for (const auto& [s, counts] : split_classes) {
    for (std::size_t k = 0; k < 3; ++k) total[k] += counts[k];
  }

  const json manifest = {
      {"format", "mwl-dataset-v1"},
      {"created", Iso8601Now()},
      {"config", c.ToJson()},
      {"data_dir", data_dir.string()},
      {"ratings", ratings_path.string()},
      {"adapter", AdapterName(c.adapter)},
      {"trim_seconds", c.trim_seconds},
      {"window", c.window},
      {"shift", c.shift},
      {"records", record_entries},
      {"split", {{"train", train_ids}, {"val", val_ids}, {"test", outer.test}}},
      {"unrated_participants", unrated},
      {"counts",
       {{"windows", stats.windows},
        {"class_counts", ClassCounts(total)},
        {"per_split", per_split},
        {"per_participant", per_participant}}},
      {"normalization", norm.ToJson()},
      {"warnings", warnings}};

  const fs::path out(c.out);
  WriteJson(out / "manifest.json", manifest);
  WriteText(out / "windows.csv", csv);
  WriteJson(out / "config.json", c.ToJson());
  Log(c, std::to_string(stats.windows) + " windows from " +
             std::to_string(records.size()) + " recordings");
  return {{"command", "preprocess"},
          {"out", out.string()},
          {"participants", ids.size()},
          {"train", train_ids.size()},
          {"val", val_ids.size()},
          {"test", outer.test.size()},
          {"windows", stats.windows},
          {"warnings", warnings}};
}

json CmdTrain(const RunConfig& c) {
  const Dataset ds = OpenDataset(c.dataset);
  const ModelConfig mc = ModelFromRun(c, ds.window);
  const TrainConfig tc = TrainFromRun(c, mc.head);

  const auto train_records = LoadSplit(ds, "train");
  const auto val_records = LoadSplit(ds, "val");
  const auto train = PrepareSamples(WindowAll(train_records, ds.window, ds.shift),
                                    ds.normalization, mc.branches);
  const auto val = PrepareSamples(WindowAll(val_records, ds.window, ds.shift),
                                  ds.normalization, mc.branches);
  Log(c, std::to_string(train.size()) + " training and " + std::to_string(val.size()) +
             " validation windows");

  FusionModel model = BuildModel(mc);
  model.set_normalization(ds.normalization);
  const History history = Train(model, train, val, tc, [&](const EpochRecord& e) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "epoch %d train %.6f val %.6f", e.epoch,
                  e.train_loss, e.val_loss);
    Log(c, buf);
  });

  const fs::path out(c.out);
  SaveModel(model, out / "checkpoint");
  json hist = history.ToJson();
  hist["train"] = tc.ToJson();
  WriteJson(out / "history.json", hist);
  const bool has_val = !val.empty();
  json report = Evaluate(model, has_val ? std::span<const Sample>(val)
                                        : std::span<const Sample>(train),
                         mc.head)
                    .ToJson();
  report["split"] = has_val ? "val" : "train";
  WriteJson(out / "val_report.json", report);
  RunConfig resolved = c;
  resolved.head = mc.head;
  resolved.lr = tc.lr;
  WriteJson(out / "config.json", resolved.ToJson());
  return {{"command", "train"},
          {"out", out.string()},
          {"epochs_run", history.epochs.size()},
          {"best_epoch", history.best_epoch},
          {"best_val_loss", history.best_val_loss},
          {"stopped_early", history.stopped_early},
          {"val_report", report}};
}

json CmdEval(const RunConfig& c) {
  const fs::path ckpt = ResolveCheckpoint(c.checkpoint);
  const FusionModel model = LoadModel(ckpt);
  const HeadKind task = c.head.value_or(model.config().head);
  if (task != model.config().head) {
    throw ConfigError("checkpoint " + ckpt.string() + " has a " +
                      std::string(HeadKindName(model.config().head)) +
                      " head but " + std::string(HeadKindName(task)) +
                      " evaluation was requested");
  }
  std::string dataset = c.dataset;
  if (dataset.empty()) {
    const fs::path run_config = ckpt.parent_path() / "config.json";
    if (fs::exists(run_config)) dataset = ReadJson(run_config).value("dataset", "");
  }
  const Dataset ds = OpenDataset(dataset);
  const auto records = LoadSplit(ds, c.split);
  const auto samples =
      PrepareSamples(WindowAll(records, ds.window, ds.shift), model.normalization(),
                     model.config().branches);
  if (samples.empty()) throw ValidationError("split '" + c.split + "' has no windows");
  const EvalReport report = Evaluate(model, samples, task);
  json j = report.ToJson();
  j["split"] = c.split;
  j["checkpoint"] = ckpt.string();
  j["dataset"] = dataset;

  // No config.json here: eval usually writes into the training run directory.
  const fs::path out(c.out);
  WriteJson(out / ("eval_" + c.split + ".json"), j);
  if (c.csv) WriteText(out / ("eval_" + c.split + ".csv"), report.ToCsv());
  return j;
}

json CmdPredict(const RunConfig& c) {
  const fs::path ckpt = ResolveCheckpoint(c.checkpoint);
  const FusionModel model = LoadModel(ckpt);
  if (c.recording.empty()) throw ValidationError("no recording given (--recording)");
  const EegRecord rec = LoadRecording(c.recording, c.adapter, c.trim_seconds);
  const std::size_t w = model.config().window;
  const std::size_t n = CountWindows(rec.num_samples(), w, c.shift);

  json predictions = json::array();
  ad::NoGradGuard no_grad;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t start = i * c.shift;
    const ad::Tensor pred = model.Forward(rec.samples.Slice(start, w));
    const auto values = pred.values();
    json p{{"start", start}};
    if (model.config().head == HeadKind::kClass3) {
      p["class_id"] = ArgmaxLowest(values);
      p["probabilities"] = std::vector<double>(values.begin(), values.end());
    } else {
      p["level"] = values[0];
    }
    predictions.push_back(p);
  }
  const json j{{"command", "predict"},
               {"recording", c.recording},
               {"head", HeadKindName(model.config().head)},
               {"window", w},
               {"shift", c.shift},
               {"predictions", predictions}};
  WriteJson(fs::path(c.out) / "predictions.json", j);
  return j;
}

json CmdAblation(const RunConfig& c) {
  const Dataset ds = OpenDataset(c.dataset);
  AblationData data;
  data.train = LoadSplit(ds, "train");
  data.val = LoadSplit(ds, "val");
  data.test = LoadSplit(ds, "test");
  data.window = ds.window;
  data.eval_shift = c.eval_shift;

  AblationOptions opt;
  if (!c.ablation_branches.empty()) {
    opt.branch_sets.clear();
    for (const auto& b : c.ablation_branches) opt.branch_sets.push_back(BranchSet::Parse(b));
  }
  opt.shifts = c.shifts;
  opt.mdrb_sweep = c.mdrb_sweep;
  opt.model = ModelFromRun(c, ds.window);
  opt.class_train = TrainFromRun(c, HeadKind::kClass3);
  opt.cont_train = TrainFromRun(c, HeadKind::kCont);
  opt.progress = [&](const std::string& msg) { Log(c, msg); };
  const AblationResult result = RunAblation(data, opt);

  const fs::path out(c.out);
  json j = result.ToJson();
  j["config"] = c.ToJson();
  WriteJson(out / "ablation.json", j);
  WriteText(out / "ablation_branches.csv", result.BranchCsv());
  if (c.mdrb_sweep) WriteText(out / "ablation_mdrb.csv", result.MdrbCsv());
  WriteJson(out / "config.json", c.ToJson());
  return {{"command", "ablation"},
          {"out", out.string()},
          {"branch_cells", result.branch_cells.size()},
          {"mdrb_cells", result.mdrb_cells.size()}};
}

json CmdSpectrum(const RunConfig& c) {
  if (c.recording.empty()) throw ValidationError("no recording given (--recording)");
  const EegRecord rec = LoadRecording(c.recording, c.adapter, c.trim_seconds);
  const std::size_t start = c.window_index * c.shift;
  if (start + c.window > rec.num_samples()) {
    throw ValidationError("window " + std::to_string(c.window_index) + " lies past the end of " +
                          c.recording);
  }
  const PsdFrame frame = ExtractBands(WelchPsd(rec.samples.Slice(start, c.window), c.nfft));
  const Block3D block = BuildBlock3d(frame);
  const fs::path out(c.out);
  fs::create_directories(out);
  const std::string tag = "nfft" + std::to_string(c.nfft);
  ExportPsdFrame(frame, out / ("psd_" + tag + ".bin"));
  ExportBlock3d(block, out / ("block_" + tag + ".bin"));
  return {{"command", "spectrum"},
          {"out", out.string()},
          {"start", start},
          {"nfft", c.nfft},
          {"depth", block.depth()},
          {"band_bins", BandBinCounts(c.nfft)}};
}

json RunCommand(const std::string& command, const RunConfig& config) {
  static const std::map<std::string, json (*)(const RunConfig&)> commands = {
      {"synth", CmdSynth},     {"preprocess", CmdPreprocess}, {"train", CmdTrain},
      {"eval", CmdEval},       {"predict", CmdPredict},       {"ablation", CmdAblation},
      {"spectrum", CmdSpectrum}};
  const auto it = commands.find(command);
  if (it == commands.end()) throw ConfigError("unknown command '" + command + "'");
  return it->second(config);
}

}  // namespace mwl
