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

#include "mwl/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "mwl/error.hpp"

namespace mwl {

namespace {

// Commas and whitespace both separate fields; empty fields collapse.
std::vector<std::string_view> SplitFields(std::string_view line) {
  constexpr std::string_view kDelims = " \t\r,";
  std::vector<std::string_view> fields;
  std::size_t i = line.find_first_not_of(kDelims);
  while (i != std::string_view::npos) {
    const std::size_t j = line.find_first_of(kDelims, i);
    fields.push_back(line.substr(i, j == std::string_view::npos ? j : j - i));
    i = j == std::string_view::npos ? j : line.find_first_not_of(kDelims, j);
  }
  return fields;
}

bool IsBlank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\r';
  });
}

std::optional<double> ParseDouble(std::string_view text) {
  double value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<int> ParseInt(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::ifstream OpenInput(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string_view TaskName(Task task) {
  return task == Task::kRest ? "rest" : "simkap";
}

Task ParseTask(std::string_view name) {
  if (name == "rest" || name == "lo") return Task::kRest;
  if (name == "simkap" || name == "hi") return Task::kSimkap;
  throw ValidationError("unknown task '" + std::string(name) + "'");
}

std::string_view AdapterName(Adapter adapter) {
  return adapter == Adapter::kStewRaw ? "stew_raw" : "csv";
}

Adapter ParseAdapter(std::string_view name) {
  if (name == "stew_raw" || name == "stew") return Adapter::kStewRaw;
  if (name == "csv") return Adapter::kCsv;
  throw ConfigError("unknown adapter '" + std::string(name) +
                    "' (expected stew_raw or csv)");
}

Matrix::Matrix(std::size_t rows, std::size_t cols,
                           std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ValidationError("sample matrix size does not match its shape");
  }
}

Matrix Matrix::Slice(std::size_t begin, std::size_t count) const {
  if (begin + count > rows_) throw ValidationError("slice out of range");
  std::vector<double> out(data_.begin() + begin * cols_,
                          data_.begin() + (begin + count) * cols_);
  return Matrix(count, cols_, std::move(out));
}

LabelBundle MakeLabel(int rating) {
  if (rating < 1 || rating > 9) {
    throw ValidationError("rating " + std::to_string(rating) +
                          " outside 1..9");
  }
  LabelBundle label;
  label.rating = rating;
  label.class_id = (rating - 1) / 3;
  label.y_cont = static_cast<double>(rating - 1) / 8.0;
  return label;
}

EegRecord LoadRecording(const std::filesystem::path& path, Adapter adapter,
                        double trim_seconds) {
  std::ifstream in = OpenInput(path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = adapter == Adapter::kCsv;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    const auto fields = SplitFields(line);
    if (header_pending) {
      header_pending = false;
      bool ok = fields.size() == kNumChannels;
      for (std::size_t c = 0; ok && c < kNumChannels; ++c) {
        ok = fields[c] == kChannelNames[c];
      }
      if (!ok) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": csv header must list the 14 channels in "
                         "canonical order");
      }
      continue;
    }
    if (fields.size() != kNumChannels) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 14 fields, got " +
                       std::to_string(fields.size()));
    }
    for (const auto field : fields) {
      const auto v = ParseDouble(field);
      if (!v) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": non-numeric field '" + std::string(field) + "'");
      }
      values.push_back(*v);
    }
  }
  if (values.empty()) throw ParseError(path.string() + ": empty input");

  std::size_t rows = values.size() / kNumChannels;
  EegRecord record;
  record.samples = Matrix(rows, kNumChannels, std::move(values));
  if (trim_seconds > 0) {
    const auto trim = static_cast<std::size_t>(std::lround(trim_seconds * kSampleRate));
    if (2 * trim >= rows) {
      throw ValidationError(path.string() + ": trim removes every sample");
    }
    record.samples = record.samples.Slice(trim, rows - 2 * trim);
  }
  return record;
}

void WriteCsvRecording(const EegRecord& record,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    out << (c ? "," : "") << kChannelNames[c];
  }
  out << '\n';
  for (std::size_t r = 0; r < record.samples.rows(); ++r) {
    for (std::size_t c = 0; c < record.samples.cols(); ++c) {
      out << (c ? "," : "") << FormatDouble(record.samples(r, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void WriteStewRecording(const EegRecord& record,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t r = 0; r < record.samples.rows(); ++r) {
    for (std::size_t c = 0; c < record.samples.cols(); ++c) {
      out << (c ? " " : "") << FormatDouble(record.samples(r, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

RatingsMap LoadRatings(const std::filesystem::path& path) {
  std::ifstream in = OpenInput(path);
  RatingsMap ratings;
  std::string line;
  std::size_t line_no = 0;
  bool first_data = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    const auto fields = SplitFields(line);
    const auto id = fields.empty() ? std::nullopt : ParseInt(fields[0]);
    if (!id) {
      if (first_data) {  // header row
        first_data = false;
        continue;
      }
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": participant id is not an integer");
    }
    first_data = false;
    if (fields.size() < 3) continue;
    std::array<int, 2> r{};
    for (int k = 0; k < 2; ++k) {
      const auto v = ParseInt(fields[1 + k]);
      if (!v) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": rating is not an integer");
      }
      if (*v < 1 || *v > 9) {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                              ": rating " + std::to_string(*v) +
                              " outside 1..9");
      }
      r[k] = *v;
    }
    ratings[{*id, Task::kRest}] = r[0];
    ratings[{*id, Task::kSimkap}] = r[1];
  }
  return ratings;
}

void WriteRatings(const RatingsMap& ratings, std::span<const int> unrated,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  std::set<int> ids;
  for (const auto& [key, _] : ratings) ids.insert(key.first);
  ids.insert(unrated.begin(), unrated.end());
  for (int id : ids) {
    const auto rest = ratings.find({id, Task::kRest});
    const auto simkap = ratings.find({id, Task::kSimkap});
    if (rest == ratings.end() || simkap == ratings.end()) {
      out << id << ",,\n";
    } else {
      out << id << ", " << rest->second << ", " << simkap->second << '\n';
    }
  }
}

std::size_t CountWindows(std::size_t n_samples, std::size_t w,
                         std::size_t shift) {
  if (shift == 0) throw ValidationError("shift must be >= 1");
  if (w == 0) throw ValidationError("window length must be >= 1");
  if (w > n_samples) return 0;
  return (n_samples - w) / shift + 1;
}

std::vector<Window> MakeWindows(const EegRecord& record, std::size_t w,
                                std::size_t shift, WindowingStats* stats) {
  if (!record.rating) {
    throw ValidationError("participant " +
                          std::to_string(record.participant_id) +
                          " has no rating for task " +
                          std::string(TaskName(record.task)));
  }
  const LabelBundle label = MakeLabel(*record.rating);
  const std::size_t count = CountWindows(record.num_samples(), w, shift);
  std::vector<Window> windows;
  windows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Window win;
    win.data = record.samples.Slice(i * shift, w);
    win.label = label;
    win.source = {record.participant_id, record.task, i * shift};
    windows.push_back(std::move(win));
  }
  if (stats) {
    ++stats->records;
    stats->windows += count;
    if (count == 0) ++stats->short_records;
  }
  return windows;
}

ParticipantSplit SplitByParticipant(std::span<const int> participant_ids,
                                    double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train fraction must lie in (0, 1)");
  }
  std::set<int> unique(participant_ids.begin(), participant_ids.end());
  if (unique.size() < 2) {
    throw ValidationError("participant split needs at least 2 participants");
  }
  std::vector<int> ids(unique.begin(), unique.end());
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw keeps the order portable across
  // standard library implementations.
  for (std::size_t i = ids.size() - 1; i > 0; --i) {
    std::swap(ids[i], ids[rng() % (i + 1)]);
  }
  const auto n = static_cast<long>(ids.size());
  long n_train = std::lround(train_fraction * static_cast<double>(n));
  n_train = std::clamp(n_train, 1L, n - 1);
  ParticipantSplit split;
  split.train.assign(ids.begin(), ids.begin() + n_train);
  split.test.assign(ids.begin() + n_train, ids.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

ParticipantSplit SplitByParticipant(std::span<const EegRecord> records,
                                    double train_fraction, std::uint64_t seed) {
  std::vector<int> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.participant_id);
  return SplitByParticipant(ids, train_fraction, seed);
}

std::vector<EegRecord> GenerateSynthetic(const SyntheticOptions& options) {
  if (options.n_participants < 1 || !(options.seconds > 0) ||
      !(options.separability >= 0) || options.n_unrated < 0 ||
      options.n_unrated > options.n_participants) {
    throw ValidationError("invalid synthetic corpus parameters");
  }
  const auto n_samples =
      static_cast<std::size_t>(std::lround(options.seconds * kSampleRate));
  if (n_samples == 0) throw ValidationError("synthetic record has no samples");

  std::mt19937_64 rng(options.seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  auto gaussian = [&uniform]() {
    // Box-Muller; std::normal_distribution is not portable bit-for-bit.
    double u1 = uniform(0.0, 1.0);
    while (u1 <= 0.0) u1 = uniform(0.0, 1.0);
    const double u2 = uniform(0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };

  // Oscillators: centre frequency, base amplitude (uV), and the direction in
  // which the amplitude moves with the workload level.
  struct Oscillator {
    double hz;
    double amplitude;
    double direction;
  };
  constexpr std::array<Oscillator, 3> kOscillators = {{
      {6.0, 6.0, +1.0},   // theta rises with load
      {10.0, 8.0, -1.0},  // alpha is suppressed
      {20.0, 4.0, +1.0},  // beta rises
  }};

  std::array<std::array<double, kOscillators.size()>, kNumChannels> topo{};
  for (auto& ch : topo) {
    for (auto& w : ch) w = uniform(0.5, 1.5);
  }

  std::vector<EegRecord> records;
  const int first_unrated = options.n_participants - options.n_unrated;
  for (int p = 0; p < options.n_participants; ++p) {
    const double gain = uniform(0.8, 1.25);
    const int rest_rating = 1 + static_cast<int>(rng() % 5);    // 1..5
    const int simkap_rating = 5 + static_cast<int>(rng() % 5);  // 5..9
    for (Task task : {Task::kRest, Task::kSimkap}) {
      EegRecord rec;
      rec.participant_id = p + 1;
      rec.task = task;
      const int rating = task == Task::kRest ? rest_rating : simkap_rating;
      if (p < first_unrated) rec.rating = rating;
      const double level = static_cast<double>(rating - 1) / 8.0 - 0.5;

      rec.samples = Matrix(n_samples, kNumChannels);
      for (std::size_t c = 0; c < kNumChannels; ++c) {
        std::array<double, kOscillators.size()> amp{}, freq{}, phase{};
        for (std::size_t k = 0; k < kOscillators.size(); ++k) {
          const auto& osc = kOscillators[k];
          amp[k] = osc.amplitude * topo[c][k] * gain *
                   std::exp(2.0 * options.separability * osc.direction * level);
          freq[k] = osc.hz + uniform(-0.5, 0.5);
          phase[k] = uniform(0.0, 2.0 * M_PI);
        }
        double ar = 0.0;
        for (std::size_t t = 0; t < n_samples; ++t) {
          ar = 0.9 * ar + 4.0 * gaussian();
          double v = gain * ar;
          const double time = static_cast<double>(t) / kSampleRate;
          for (std::size_t k = 0; k < kOscillators.size(); ++k) {
            v += amp[k] * std::sin(2.0 * M_PI * freq[k] * time + phase[k]);
          }
          rec.samples(t, c) = v;
        }
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace mwl
