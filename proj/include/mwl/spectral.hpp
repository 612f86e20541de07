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
// Welch power spectra, six-band extraction and the 6x6 electrode grid used
// to lay spectra out as spatial-spectral volumes.

#ifndef MWL_SPECTRAL_HPP_
#define MWL_SPECTRAL_HPP_

#include <array>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "mwl/ingest.hpp"
#include "mwl/matrix.hpp"

namespace mwl {

enum class Band { kDelta, kTheta, kAlpha, kSigma, kBeta, kGamma };

std::string_view BandName(Band band);

struct BandSpec {
  Band band;
  double lo;  // Hz, inclusive
  double hi;  // Hz, exclusive
};

inline constexpr std::array<BandSpec, 6> kCanonicalBands = {{
    {Band::kDelta, 0.5, 4.0},
    {Band::kTheta, 4.0, 8.0},
    {Band::kAlpha, 8.0, 12.0},
    {Band::kSigma, 12.0, 16.0},
    {Band::kBeta, 16.0, 30.0},
    {Band::kGamma, 30.0, 45.0},
}};

inline constexpr std::size_t kGridSize = 6;

struct Spectrum {
  std::vector<double> frequencies;  // k * fs / nfft, k = 0..nfft/2
  Matrix psd;                       // (nfft/2 + 1) x channels
};

// Welch estimate per channel: segments of nfft samples with 50% overlap,
// periodic Hann taper, averaged modified periodograms, one-sided density
// scaling (units^2 / Hz). No detrending.
Spectrum WelchPsd(const Matrix& window, std::size_t nfft,
                  double fs = kSampleRate);

struct FrequencyBin {
  Band band;
  double hz;
};

struct PsdFrame {
  Matrix values;  // K x 14, rows grouped delta..gamma
  std::vector<FrequencyBin> bins;
  std::size_t nfft = 0;

  std::size_t depth() const { return values.rows(); }
};

// Keeps bins with lo <= f < hi per band, concatenated in band order. Throws
// ConfigError naming the first band that receives no bin.
PsdFrame ExtractBands(const Spectrum& spectrum,
                      std::span<const BandSpec> bands = kCanonicalBands);

// Bins per band for a given resolution, without computing any spectrum.
std::vector<std::size_t> BandBinCounts(std::size_t nfft,
                                       double fs = kSampleRate,
                                       std::span<const BandSpec> bands =
                                           kCanonicalBands);

struct GridCell {
  std::size_t row;
  std::size_t col;
};

// Grid position of each channel, indexed in canonical channel order.
inline constexpr std::array<GridCell, kNumChannels> kElectrodeGrid = {{
    {0, 2},  // AF3
    {1, 1},  // F7
    {1, 2},  // F3
    {2, 2},  // FC5
    {3, 1},  // T7
    {4, 2},  // P7
    {5, 2},  // O1
    {5, 3},  // O2
    {4, 3},  // P8
    {3, 4},  // T8
    {2, 3},  // FC6
    {1, 3},  // F4
    {1, 4},  // F8
    {0, 3},  // AF4
}};

using Grid = std::array<std::array<double, kGridSize>, kGridSize>;

// Places a 14-channel row on the electrode grid; empty cells are 0.
Grid MapChannels2d(std::span<const double> row);

// 6 x 6 x K volume, stored [row][col][depth] row-major.
struct Block3D {
  std::vector<double> values;
  std::vector<FrequencyBin> bins;

  std::size_t depth() const { return bins.size(); }
  double at(std::size_t r, std::size_t c, std::size_t d) const {
    return values[(r * kGridSize + c) * depth() + d];
  }
};

Block3D BuildBlock3d(const PsdFrame& frame);

// Flat little-endian float64 dump plus a JSON sidecar (<path>.json)
// describing shape and bins.
void ExportPsdFrame(const PsdFrame& frame, const std::filesystem::path& path);
void ExportBlock3d(const Block3D& block, const std::filesystem::path& path);

namespace internal {
// In-place radix-2 FFT; size must be a power of two.
void Fft(std::span<std::complex<double>> data);
}  // namespace internal

}  // namespace mwl

#endif  // MWL_SPECTRAL_HPP_
