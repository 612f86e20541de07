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
// EEG recordings, workload labels, fixed-length windows and participant
// splits. Recordings are 14-channel Emotiv captures at 128 Hz.

#ifndef MWL_INGEST_HPP_
#define MWL_INGEST_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mwl/matrix.hpp"

namespace mwl {

inline constexpr std::size_t kNumChannels = 14;
inline constexpr double kSampleRate = 128.0;
inline constexpr std::size_t kDefaultWindow = 512;
inline constexpr std::size_t kDefaultShift = 128;

inline constexpr std::array<std::string_view, kNumChannels> kChannelNames = {
    "AF3", "F7", "F3", "FC5", "T7", "P7", "O1",
    "O2",  "P8", "T8", "FC6", "F4", "F8", "AF4"};

enum class Task { kRest, kSimkap };

std::string_view TaskName(Task task);
Task ParseTask(std::string_view name);

struct LabelBundle {
  int rating = 0;     // 1..9
  int class_id = 0;   // 0 low, 1 middle, 2 high
  double y_cont = 0;  // (rating - 1) / 8

  bool operator==(const LabelBundle&) const = default;
};

// Throws ValidationError for ratings outside 1..9.
LabelBundle MakeLabel(int rating);

struct EegRecord {
  Matrix samples;  // n_samples x 14, canonical channel order
  double fs = kSampleRate;
  int participant_id = 0;
  Task task = Task::kRest;
  std::optional<int> rating;

  std::size_t num_samples() const { return samples.rows(); }
};

struct WindowSource {
  int participant_id = 0;
  Task task = Task::kRest;
  std::size_t start = 0;
};

struct Window {
  Matrix data;  // W x 14
  LabelBundle label;
  WindowSource source;
};

enum class Adapter { kStewRaw, kCsv };

std::string_view AdapterName(Adapter adapter);
Adapter ParseAdapter(std::string_view name);

// Reads one recording. stew_raw: whitespace or comma separated, 14 values
// per line, no header. csv: header row naming the 14 channels, then one
// sample per line. trim_seconds drops that much from both ends.
// Throws ParseError (with line number) or IoError.
EegRecord LoadRecording(const std::filesystem::path& path, Adapter adapter,
                        double trim_seconds = 0.0);

// Writes the canonical csv form read back by LoadRecording(kCsv).
void WriteCsvRecording(const EegRecord& record,
                       const std::filesystem::path& path);
void WriteStewRecording(const EegRecord& record,
                        const std::filesystem::path& path);

using RatingsMap = std::map<std::pair<int, Task>, int>;

// Rows: "participant, rest_rating, simkap_rating". Rows missing a rating
// are skipped. Throws ValidationError for ratings outside 1..9.
RatingsMap LoadRatings(const std::filesystem::path& path);
void WriteRatings(const RatingsMap& ratings, std::span<const int> unrated,
                  const std::filesystem::path& path);

struct WindowingStats {
  std::size_t records = 0;
  std::size_t windows = 0;
  std::size_t short_records = 0;  // records with fewer than w samples
};

// Window i covers samples [i * shift, i * shift + w). Records shorter than
// w produce no windows and bump stats->short_records. The record must carry
// a rating.
std::vector<Window> MakeWindows(const EegRecord& record, std::size_t w,
                                std::size_t shift,
                                WindowingStats* stats = nullptr);

std::size_t CountWindows(std::size_t n_samples, std::size_t w,
                         std::size_t shift);

struct ParticipantSplit {
  std::vector<int> train;  // sorted
  std::vector<int> test;   // sorted
};

// Shuffles the distinct participants with `seed` and assigns
// round(train_fraction * n), clamped to [1, n - 1], to train.
ParticipantSplit SplitByParticipant(std::span<const int> participant_ids,
                                    double train_fraction, std::uint64_t seed);
ParticipantSplit SplitByParticipant(std::span<const EegRecord> records,
                                    double train_fraction, std::uint64_t seed);

struct SyntheticOptions {
  int n_participants = 6;
  double seconds = 60.0;
  std::uint64_t seed = 1;
  double separability = 1.5;
  int n_unrated = 0;  // trailing participants emitted without ratings
};

// Two records (rest, simkap) per participant. Band-limited oscillations in
// the theta, alpha and beta bands have amplitudes that move monotonically
// with the rating, scaled by `separability`; at zero the class-conditional
// spectra are identically distributed.
std::vector<EegRecord> GenerateSynthetic(const SyntheticOptions& options);

}  // namespace mwl

#endif  // MWL_INGEST_HPP_
