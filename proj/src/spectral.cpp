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

#include "mwl/spectral.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "mwl/error.hpp"

namespace mwl {

namespace internal {

void Fft(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (!std::has_single_bit(n)) throw ConfigError("FFT size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  // Twiddles computed directly rather than by recurrence to keep rounding
  // error flat across k.
  std::vector<std::complex<double>> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
    twiddle[k] = {std::cos(angle), std::sin(angle)};
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2, stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const auto w = twiddle[k * stride];
        const auto x = data[i + k + half];
        const std::complex<double> v(x.real() * w.real() - x.imag() * w.imag(),
                                     x.real() * w.imag() + x.imag() * w.real());
        const auto u = data[i + k];
        data[i + k] = u + v;
        data[i + k + half] = u - v;
      }
    }
  }
}

}  // namespace internal

std::string_view BandName(Band band) {
  switch (band) {
    case Band::kDelta: return "delta";
    case Band::kTheta: return "theta";
    case Band::kAlpha: return "alpha";
    case Band::kSigma: return "sigma";
    case Band::kBeta: return "beta";
    case Band::kGamma: return "gamma";
  }
  return "?";
}

Spectrum WelchPsd(const Matrix& window, std::size_t nfft, double fs) {
  if (nfft < 2 || !std::has_single_bit(nfft)) {
    throw ConfigError("nfft must be a power of two >= 2, got " +
                      std::to_string(nfft));
  }
  if (nfft > window.rows()) {
    throw ConfigError("nfft " + std::to_string(nfft) +
                      " exceeds window length " +
                      std::to_string(window.rows()));
  }
  for (double v : window.data()) {
    if (!std::isfinite(v)) throw NumericError("non-finite sample in window");
  }

  const std::size_t step = nfft / 2;
  const std::size_t n_segments = (window.rows() - nfft) / step + 1;
  const std::size_t n_bins = nfft / 2 + 1;

  std::vector<double> taper(nfft);
  double taper_power = 0.0;
  for (std::size_t i = 0; i < nfft; ++i) {
    taper[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                    static_cast<double>(nfft));
    taper_power += taper[i] * taper[i];
  }
  const double scale = 1.0 / (fs * taper_power * static_cast<double>(n_segments));

  Spectrum out;
  out.frequencies.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    out.frequencies[k] = static_cast<double>(k) * fs / static_cast<double>(nfft);
  }
  out.psd = Matrix(n_bins, window.cols());

  std::vector<std::complex<double>> buf(nfft);
  for (std::size_t c = 0; c < window.cols(); ++c) {
    for (std::size_t s = 0; s < n_segments; ++s) {
      const std::size_t begin = s * step;
      for (std::size_t i = 0; i < nfft; ++i) {
        buf[i] = {window(begin + i, c) * taper[i], 0.0};
      }
      internal::Fft(buf);
      for (std::size_t k = 0; k < n_bins; ++k) {
        out.psd(k, c) += std::norm(buf[k]);
      }
    }
    for (std::size_t k = 0; k < n_bins; ++k) {
      // One-sided: fold negative frequencies onto all bins but DC and Nyquist.
      const bool edge = k == 0 || k == nfft / 2;
      out.psd(k, c) *= scale * (edge ? 1.0 : 2.0);
    }
  }
  return out;
}

std::vector<std::size_t> BandBinCounts(std::size_t nfft, double fs,
                                       std::span<const BandSpec> bands) {
  std::vector<std::size_t> counts(bands.size(), 0);
  const double df = fs / static_cast<double>(nfft);
  for (std::size_t k = 0; k <= nfft / 2; ++k) {
    const double f = static_cast<double>(k) * df;
    for (std::size_t b = 0; b < bands.size(); ++b) {
      if (f >= bands[b].lo && f < bands[b].hi) ++counts[b];
    }
  }
  return counts;
}

PsdFrame ExtractBands(const Spectrum& spectrum,
                      std::span<const BandSpec> bands) {
  const auto& f = spectrum.frequencies;
  if (f.size() != spectrum.psd.rows() || f.size() < 2) {
    throw ValidationError("spectrum frequencies do not match its rows");
  }
  const double df = f[1] - f[0];
  for (std::size_t k = 1; k < f.size(); ++k) {
    if (std::abs((f[k] - f[k - 1]) - df) > 1e-9 * std::max(1.0, df)) {
      throw ValidationError("spectrum frequencies are not uniformly spaced");
    }
  }

  std::vector<std::size_t> rows;
  PsdFrame frame;
  for (const auto& spec : bands) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (f[k] >= spec.lo && f[k] < spec.hi) {
        rows.push_back(k);
        frame.bins.push_back({spec.band, f[k]});
        ++count;
      }
    }
    if (count == 0) {
      throw ConfigError("band " + std::string(BandName(spec.band)) +
                        " receives no frequency bin at " + std::to_string(df) +
                        " Hz resolution");
    }
  }
  const std::size_t channels = spectrum.psd.cols();
  frame.values = Matrix(rows.size(), channels);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      frame.values(i, c) = spectrum.psd(rows[i], c);
    }
  }
  frame.nfft = 2 * (f.size() - 1);
  return frame;
}

Grid MapChannels2d(std::span<const double> row) {
  if (row.size() != kNumChannels) {
    throw ValidationError("channel row has " + std::to_string(row.size()) +
                          " values, expected 14");
  }
  Grid grid{};
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    grid[kElectrodeGrid[c].row][kElectrodeGrid[c].col] = row[c];
  }
  return grid;
}

Block3D BuildBlock3d(const PsdFrame& frame) {
  if (frame.values.cols() != kNumChannels ||
      frame.values.rows() != frame.bins.size() || frame.bins.empty()) {
    throw ValidationError("malformed PSD frame");
  }
  const std::size_t depth = frame.depth();
  Block3D block;
  block.bins = frame.bins;
  block.values.assign(kGridSize * kGridSize * depth, 0.0);
  for (std::size_t d = 0; d < depth; ++d) {
    const Grid grid = MapChannels2d(frame.values.row(d));
    for (std::size_t r = 0; r < kGridSize; ++r) {
      for (std::size_t c = 0; c < kGridSize; ++c) {
        block.values[(r * kGridSize + c) * depth + d] = grid[r][c];
      }
    }
  }
  return block;
}

namespace {

void WriteFlat(std::span<const double> values, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little,
                "binary exports assume a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path.string());
}

nlohmann::json BinsJson(std::span<const FrequencyBin> bins) {
  auto arr = nlohmann::json::array();
  for (const auto& b : bins) {
    arr.push_back({{"band", BandName(b.band)}, {"hz", b.hz}});
  }
  return arr;
}

void WriteSidecar(const nlohmann::json& meta, const std::filesystem::path& path) {
  std::ofstream out(path.string() + ".json");
  if (!out) throw IoError("cannot write " + path.string() + ".json");
  out << meta.dump(2) << '\n';
}

}  // namespace

void ExportPsdFrame(const PsdFrame& frame, const std::filesystem::path& path) {
  WriteFlat(frame.values.data(), path);
  WriteSidecar({{"kind", "psd_frame"},
                {"dtype", "float64"},
                {"layout", "row-major [bin][channel]"},
                {"shape", {frame.values.rows(), frame.values.cols()}},
                {"nfft", frame.nfft},
                {"channels", kChannelNames},
                {"bins", BinsJson(frame.bins)}},
               path);
}

void ExportBlock3d(const Block3D& block, const std::filesystem::path& path) {
  WriteFlat(block.values, path);
  WriteSidecar({{"kind", "block3d"},
                {"dtype", "float64"},
                {"layout", "row-major [row][col][depth]"},
                {"shape", {kGridSize, kGridSize, block.depth()}},
                {"bins", BinsJson(block.bins)}},
               path);
}

}  // namespace mwl
