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

// Acceptance checks. Prints one [PASS]/[FAIL] line per criterion and exits
// non-zero when any criterion fails.
//
// Criterion 10 reads a real STEW directory from MWL_STEW_DIR when set
// (files subNN_lo.txt / subNN_hi.txt plus ratings.txt); otherwise it runs on
// a STEW-shaped synthetic stand-in.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mwl/blocks.hpp"
#include "mwl/error.hpp"
#include "mwl/gradcheck.hpp"
#include "mwl/ingest.hpp"
#include "mwl/model.hpp"
#include "mwl/ops.hpp"
#include "mwl/pipeline.hpp"
#include "mwl/spectral.hpp"
#include "mwl/trainer.hpp"
#include "test_util.hpp"

namespace mwl {
namespace {

namespace fs = std::filesystem;
using ad::Shape;
using ad::Tensor;
using nlohmann::json;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

Tensor Random(Shape shape, std::mt19937_64& rng, bool grad = false) {
  std::normal_distribution<double> dist;
  std::vector<double> v(ad::NumElements(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::FromValues(std::move(shape), std::move(v), grad);
}

Tensor Probe(const Tensor& out) {
  std::mt19937_64 rng(1234);
  return ad::MeanAll(ad::Dense(out, Random({out.numel(), 1}, rng), Tensor()));
}

std::vector<double> NaiveHannPeriodogram(const Matrix& x, std::size_t col) {
  const std::size_t n = x.rows();
  std::vector<double> w(n);
  double wss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * double(i) / double(n));
    wss += w[i] * w[i];
  }
  std::vector<double> p(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    long double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long double a = -2.0L * M_PI * (long double)(k * i % n) / (long double)n;
      re += x(i, col) * w[i] * std::cos(a);
      im += x(i, col) * w[i] * std::sin(a);
    }
    p[k] = ((k == 0 || k == n / 2) ? 1.0 : 2.0) * double(re * re + im * im) / (kSampleRate * wss);
  }
  return p;
}

// 1. Welch PSD against a direct-summation periodogram, plus power balance.
void SpectralOracle(Outcome& o) {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nfft = trial % 2 ? 128 : 64;
    const Matrix x = testing::RandomMatrix(nfft, kNumChannels, rng, 20.0);
    const Spectrum s = WelchPsd(x, nfft);
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      const auto ref = NaiveHannPeriodogram(x, c);
      for (std::size_t k = 0; k < ref.size(); ++k) {
        worst = std::max(worst, testing::RelativeError(s.psd(k, c), ref[k]));
      }
    }
  }
  o.Require(worst <= 1e-9, "periodogram relative error " + std::to_string(worst));

  const Matrix noise = testing::RandomMatrix(16384, 1, rng, 2.0);
  double power = 0.0;
  for (std::size_t i = 0; i < noise.rows(); ++i) power += noise(i, 0) * noise(i, 0);
  power /= double(noise.rows());
  const Spectrum s = WelchPsd(noise, 256);
  double integral = 0.0;
  for (std::size_t k = 0; k < s.psd.rows(); ++k) integral += s.psd(k, 0) * (kSampleRate / 256.0);
  const double balance = std::abs(integral - power) / power;
  o.Require(balance <= 0.01, "power balance off by " + std::to_string(balance));
  o.detail << "100 windows, max rel err " << worst << "; power balance " << balance * 100 << "%";
}

// 2. Electrode placement against the printed 6x6 layout.
void GridMapping(Outcome& o) {
  const char* layout[6][6] = {
      {"", "", "AF3", "AF4", "", ""}, {"", "F7", "F3", "F4", "F8", ""},
      {"", "", "FC5", "FC6", "", ""}, {"", "T7", "", "", "T8", ""},
      {"", "", "P7", "P8", "", ""},   {"", "", "O1", "O2", "", ""}};
  std::vector<double> row(kNumChannels);
  for (std::size_t c = 0; c < kNumChannels; ++c) row[c] = double(c + 1);
  const Grid g = MapChannels2d(row);
  int verified = 0;
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 6; ++c) {
      const std::string want = layout[r][c];
      const std::string got = g[r][c] == 0.0 ? "" : std::string(kChannelNames[std::size_t(g[r][c]) - 1]);
      o.Require(got == want, "cell (" + std::to_string(r) + "," + std::to_string(c) + ") holds '" +
                                 got + "', expected '" + want + "'");
      verified += !want.empty() && got == want;
    }
  }
  o.Require(verified == 14, "only " + std::to_string(verified) + " placements verified");

  std::mt19937_64 rng(2);
  const Matrix x = testing::RandomMatrix(512, kNumChannels, rng);
  bool mask_ok = true;
  for (std::size_t nfft : {64u, 128u}) {
    const Block3D b = BuildBlock3d(ExtractBands(WelchPsd(x, nfft)));
    for (std::size_t d = 0; d < b.depth(); ++d)
      for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t c = 0; c < 6; ++c)
          mask_ok &= (b.at(r, c, d) == 0.0) == (layout[r][c][0] == '\0');
  }
  o.Require(mask_ok, "zero mask differs between depth slices");
  o.detail << verified << "/14 placements, 22 empty cells, mask identical over 66 slices";
}

// 3. Bins per band by an exact integer count under lo <= f < hi.
std::vector<std::size_t> CountBins(long nfft) {
  const long edges2[][2] = {{1, 8}, {8, 16}, {16, 24}, {24, 32}, {32, 60}, {60, 90}};
  std::vector<std::size_t> counts;
  for (const auto& e : edges2) {
    std::size_t n = 0;
    for (long k = 0; k <= nfft / 2; ++k) n += e[0] * nfft <= 2 * k * 128 && 2 * k * 128 < e[1] * nfft;
    counts.push_back(n);
  }
  return counts;
}

void BandCounting(Outcome& o) {
  const std::vector<std::size_t> k64 = {1, 2, 2, 2, 7, 8}, k128 = {3, 4, 4, 4, 14, 15};
  o.Require(CountBins(64) == k64, "independent count for nfft 64");
  o.Require(CountBins(128) == k128, "independent count for nfft 128");
  o.Require(BandBinCounts(64) == k64, "library count for nfft 64");
  o.Require(BandBinCounts(128) == k128, "library count for nfft 128");
  std::mt19937_64 rng(3);
  const Matrix x = testing::RandomMatrix(512, kNumChannels, rng);
  o.Require(ExtractBands(WelchPsd(x, 64)).depth() == 22, "K for nfft 64");
  o.Require(ExtractBands(WelchPsd(x, 128)).depth() == 44, "K for nfft 128");
  o.detail << "nfft 64 -> K=22 (1,2,2,2,7,8); nfft 128 -> K=44 (3,4,4,4,14,15)";
}

// 4. Depth schedules and the depth left after two MDRBs.
void DepthSchedules(Outcome& o) {
  const DepthSchedule a = ComputeDepthSchedule(22), b = ComputeDepthSchedule(44);
  o.Require(a.d1 == 11 && a.d_out == 12 && a.d2 == 10, "schedule(22)");
  o.Require(b.d1 == 22 && b.d_out == 23 && b.d2 == 21, "schedule(44)");
  for (std::size_t d = 3; d <= 200; ++d) {
    const DepthSchedule s = ComputeDepthSchedule(d);
    if (s.d1 + s.d_out != d + 1 || s.d2 != s.d1 - 1) {
      o.Require(false, "identity broken at d_in=" + std::to_string(d));
    }
  }
  std::mt19937_64 rng(4);
  for (std::size_t depth : {22u, 44u}) {
    Initializer init(4);
    const FreqBranch fb(depth, 2, HeadKind::kClass3, init);
    const Tensor out = fb.second().Forward(fb.first().Forward(Random({6, 6, depth, 1}, rng)));
    o.Require(out.dim(2) == 3, "branch with K=" + std::to_string(depth) + " ends at depth " +
                                   std::to_string(out.dim(2)));
  }
  o.detail << "(11,12,10) and (22,23,21); both branches end at depth 3; identities hold for 3..200";
}

// 5. Finite-difference gradient checks per layer and on the fused model.
void Gradients(Outcome& o) {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  int checks = 0;
  auto run = [&](const char* name, const std::function<Tensor()>& fn, std::vector<Tensor> params,
                 double eps = 1e-5, double floor = 1e-6) {
    const double e = ad::FiniteDiffCheck(fn, params, eps, floor).max_rel_error;
    worst = std::max(worst, e);
    ++checks;
    o.Require(e <= 1e-4, std::string(name) + " rel err " + std::to_string(e));
  };
  auto away = [&](Shape s) {
    Tensor t = Random(s, rng, true);
    for (auto& v : t.mutable_values()) v = (v < 0 ? -0.3 : 0.3) + v * 0.5;
    return t;
  };
  {
    const Tensor x = Random({3, 4, 5, 2}, rng, true), k = Random({3, 3, 2, 2, 3}, rng, true),
                 b = Random({3}, rng, true);
    run("conv3d", [&] { return Probe(ad::Conv3d(x, k, b)); }, {x, k, b});
  }
  {
    const Tensor x = Random({9, 2}, rng, true), k = Random({2, 2, 3}, rng, true), b = Random({3}, rng, true);
    run("conv1d", [&] { return Probe(ad::Conv1dCausal(x, k, b, 2)); }, {x, k, b});
  }
  {
    const Tensor x = Random({5}, rng, true), w = Random({5, 3}, rng, true), b = Random({3}, rng, true);
    run("dense", [&] { return Probe(ad::Dense(x, w, b)); }, {x, w, b});
  }
  {
    const Tensor x = away({2, 5});
    run("relu", [&] { return Probe(ad::Relu(x)); }, {x});
    run("sigmoid", [&] { return Probe(ad::Sigmoid(x)); }, {x});
    run("softmax", [&] { return Probe(ad::Softmax(x)); }, {x});
    run("gap", [&] { return Probe(ad::GlobalAveragePool(x)); }, {x});
    run("last step", [&] { return Probe(ad::LastStep(x)); }, {x});
  }
  {
    const Tensor a = Random({4}, rng, true), b = Random({4}, rng, true);
    run("mean", [&] {
      const Tensor xs[] = {a, b};
      return Probe(ad::Mean(xs));
    }, {a, b});
    run("add", [&] { return Probe(ad::Add(a, b)); }, {a, b});
    const Tensor onehot = Tensor::FromValues({1, 4}, {0, 0, 1, 0});
    run("cross entropy", [&] {
      const Tensor rows[] = {ad::Softmax(a)};
      return ad::CrossEntropy(ad::Stack(rows), onehot);
    }, {a});
    run("mse", [&] { return ad::Mse(a, b); }, {a});
  }
  {
    Initializer init(6);
    const Mdrb m({3, 3, 2, 2}, 1, init);
    const Tensor x = Random({4, 4, 4, 1}, rng, true);
    auto params = m.Branch1Params();
    for (const auto& t : m.Branch2Params()) params.push_back(t);
    params.push_back(x);
    run("mdrb", [&] { return Probe(m.Forward(x)); }, params);
  }
  {
    Initializer init(7);
    const TcnBranch tcn({.kernel = 2, .filters = 3, .stacks = 1, .dilations = {1, 2}}, 2,
                        HeadKind::kCont, init);
    const Tensor x = Random({8, 2}, rng, true);
    ParamList pl;
    tcn.CollectParams("t", pl);
    std::vector<Tensor> params{x};
    for (const auto& p : pl) params.push_back(p.tensor);
    run("tcn", [&] { return Probe(tcn.Forward(x)); }, params);
  }
  {
    ModelConfig cfg;
    cfg.mdrb_filters = 2;
    cfg.tcn = {.kernel = 2, .filters = 2, .stacks = 1, .dilations = {1, 2}};
    cfg.window = 128;
    const FusionModel m = BuildModel(cfg);
    const Features f = ExtractFeatures(testing::RandomMatrix(128, kNumChannels, rng, 5.0),
                                       m.normalization());
    // Zero biases put masked grid cells exactly on the ReLU kink.
    std::uniform_real_distribution<double> shift(0.05, 0.2);
    for (auto& p : m.Params()) {
      if (p.name.ends_with("bias")) {
        for (auto& v : p.tensor.mutable_values()) v = shift(rng);
      }
    }
    const Tensor onehot = Tensor::FromValues({1, 3}, {0, 1, 0});
    run("fused model", [&] {
      const Tensor rows[] = {m.Forward(f)};
      return ad::CrossEntropy(ad::Stack(rows), onehot);
    }, m.ParamTensors(), 1e-6, 1e-5);
  }
  // Negative control: a ReLU whose backward passes gradient through
  // negative inputs.
  const Tensor x = away({6});
  auto leaky_backward = [](const Tensor& t) {
    std::vector<double> v(t.values().begin(), t.values().end());
    for (auto& e : v) e = std::max(e, 0.0);
    return Tensor::MakeResult("broken_relu", t.shape(), std::move(v), {t},
                              [](std::span<const double> g, std::vector<Tensor>& p) {
                                auto gx = p[0].grad_buffer();
                                for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                              });
  };
  std::vector<Tensor> xs{x};
  const double corrupt =
      ad::FiniteDiffCheck([&] { return Probe(leaky_backward(x)); }, xs).max_rel_error;
  o.Require(corrupt > 1e-4, "corrupted backward not detected");
  o.detail << checks << " checks, max rel err " << worst << "; corrupted rule flagged at " << corrupt;
}

// 6. Causality and receptive field of the time branch.
void TcnContract(Outcome& o) {
  std::mt19937_64 rng(8);
  {
    Initializer init(8);
    const TcnConfig cfg{.kernel = 2, .filters = 8, .stacks = 2, .dilations = {1, 2, 4, 8}};
    const TcnBranch tcn(cfg, kNumChannels, HeadKind::kCont, init);
    const std::size_t T = 96;
    const Tensor x = Random({T, kNumChannels}, rng);
    const Tensor base = tcn.Sequence(x);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t t0 = rng() % T;
      std::vector<double> v(x.values().begin(), x.values().end());
      v[t0 * kNumChannels + rng() % kNumChannels] += 1.0 + double(rng() % 100) / 10.0;
      const Tensor y = tcn.Sequence(Tensor::FromValues(x.shape(), v));
      for (std::size_t i = 0; i < t0 * cfg.filters; ++i) {
        if (y.values()[i] != base.values()[i]) {
          ++violations;
          break;
        }
      }
    }
    o.Require(violations == 0, std::to_string(violations) + " causality violations");
  }
  Initializer init(9);
  const TcnConfig cfg;  // default: kernel 2, 128 filters, 2 stacks, dilations 1,2,4,8
  const TcnBranch tcn(cfg, kNumChannels, HeadKind::kCont, init);
  const std::size_t T = 80, rf = cfg.ReceptiveField();
  o.Require(rf == 61, "receptive field " + std::to_string(rf));
  const Tensor x = Random({T, kNumChannels}, rng);
  const Tensor base = tcn.Features(x);
  int outside_changed = 0;
  for (std::size_t t0 = 0; t0 < T - rf; ++t0) {
    std::vector<double> v(x.values().begin(), x.values().end());
    for (std::size_t c = 0; c < kNumChannels; ++c) v[t0 * kNumChannels + c] += 10.0;
    const Tensor y = tcn.Features(Tensor::FromValues(x.shape(), v));
    outside_changed += !std::equal(y.values().begin(), y.values().end(), base.values().begin());
  }
  o.Require(outside_changed == 0, "last step moved for inputs before T-61");
  std::vector<double> v(x.values().begin(), x.values().end());
  for (std::size_t c = 0; c < kNumChannels; ++c) v[(T - rf) * kNumChannels + c] += 10.0;
  const Tensor edge = tcn.Features(Tensor::FromValues(x.shape(), v));
  o.Require(!std::equal(edge.values().begin(), edge.values().end(), base.values().begin()),
            "input at T-61 does not reach the last step");
  o.detail << "1000 perturbations, 0 violations; default config ignores t < T-" << rf
           << " and sees t = T-" << rf;
}

// 7. Concordance: exact trivial cases and the correlation form.
void CccChecks(Outcome& o) {
  const std::vector<double> y = {0.0, 0.125, 0.5, 0.875, 1.0, 0.25};
  std::vector<double> neg_src = {-2.0, 1.0, 0.5, -0.5, 3.0, -2.0};
  std::vector<double> neg;
  for (double v : neg_src) neg.push_back(-v);
  const std::vector<double> flat(6, 0.4);
  o.Require(Ccc(y, y).value == 1.0, "identical sequences");
  o.Require(Ccc(neg, neg_src).value == -1.0, "negated zero-mean sequences");
  o.Require(Ccc(flat, y).value == 0.0, "constant prediction");

  std::mt19937_64 rng(10);
  std::normal_distribution<double> dist;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 200;
    std::vector<double> p(n), t(n);
    const double bias = dist(rng), gain = std::exp(dist(rng));
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = dist(rng);
      p[i] = bias + gain * (dist(rng) * 0.7 + t[i] * dist(rng));
    }
    double mp = 0, mt = 0;
    for (std::size_t i = 0; i < n; ++i) mp += p[i] / double(n), mt += t[i] / double(n);
    double sp = 0, st = 0, spt = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sp += (p[i] - mp) * (p[i] - mp);
      st += (t[i] - mt) * (t[i] - mt);
      spt += (p[i] - mp) * (t[i] - mt);
    }
    const double rho = spt / std::sqrt(sp * st);
    const double sdp = std::sqrt(sp / double(n)), sdt = std::sqrt(st / double(n));
    const double eq8 = 2 * rho * sdp * sdt / (sdp * sdp + sdt * sdt + (mp - mt) * (mp - mt));
    worst = std::max(worst, std::abs(Ccc(p, t).value - eq8));
  }
  o.Require(worst <= 1e-12, "forms differ by " + std::to_string(worst));
  o.detail << "1, -1, 0 exact; 1000 pairs, max difference " << worst;
}

// 8. End-to-end learning on a separable synthetic corpus, both heads.
void EndToEnd(Outcome& o) {
  testing::TempDir dir;
  RunConfig base;
  base.participants = 24;
  base.seconds = 8;
  base.separability = 3.0;
  base.seed = 1;
  base.tcn.filters = 8;
  base.mdrb_filters = 8;
  base.data = (dir / "data").string();
  base.dataset = (dir / "ds").string();

  const auto start = std::chrono::steady_clock::now();
  RunConfig c = base;
  c.out = base.data;
  CmdSynth(c);
  c.out = base.dataset;
  const json pre = CmdPreprocess(c);
  const std::size_t windows = pre.at("windows").get<std::size_t>();
  o.Require(windows <= 1000, "corpus has " + std::to_string(windows) + " windows");

  c = base;
  c.head = HeadKind::kClass3;
  c.out = (dir / "cls").string();
  const json cls_train = CmdTrain(c);
  c.checkpoint = c.out;
  const double acc = CmdEval(c).at("accuracy").get<double>();

  c = base;
  c.head = HeadKind::kCont;
  c.lr = 1e-4;
  c.out = (dir / "reg").string();
  const json reg_train = CmdTrain(c);
  c.checkpoint = c.out;
  const double ccc = CmdEval(c).at("ccc").get<double>();
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;

  o.Require(acc >= 0.90, "held-out accuracy " + std::to_string(acc));
  o.Require(ccc >= 0.80, "held-out CCC " + std::to_string(ccc));
  o.Require(minutes <= 10.0, "took " + std::to_string(minutes) + " min");
  o.detail << windows << " windows; accuracy " << acc << " (epochs "
           << cls_train.at("epochs_run") << "), CCC " << ccc << " (epochs "
           << reg_train.at("epochs_run") << "), " << minutes << " min total";
}

// 9. Ablation grid structure and the branch-mean identity.
void Ablation(Outcome& o) {
  SyntheticOptions so;
  so.n_participants = 4;
  so.seconds = 6;
  auto recs = GenerateSynthetic(so);
  AblationData data;
  for (auto& r : recs) {
    auto& bucket = r.participant_id <= 2 ? data.train : (r.participant_id == 3 ? data.val : data.test);
    bucket.push_back(std::move(r));
  }
  AblationOptions opt;
  opt.model.mdrb_filters = 2;
  opt.model.tcn = {.kernel = 2, .filters = 2, .stacks = 1, .dilations = {1, 2}};
  opt.class_train.epochs = 1;
  opt.cont_train.epochs = 1;
  opt.cont_train.lr = 1e-4;
  const AblationResult r = RunAblation(data, opt);

  const std::vector<std::string> rows = {"time", "b1", "b2", "time+b1", "time+b2", "b1+b2", "time+b1+b2"};
  const std::vector<std::size_t> shifts = {128, 256, 384, 512};
  o.Require(r.branch_rows == rows, "branch rows");
  o.Require(r.shifts == shifts, "shift columns");
  o.Require(r.mdrb_rows == std::vector<std::string>{"branch1", "branch2", "combined"}, "mdrb rows");
  auto complete = [&](const std::vector<std::string>& want, const std::vector<AblationCell>& cells) {
    for (const auto& row : want)
      for (auto s : shifts) {
        const auto n = std::count_if(cells.begin(), cells.end(),
                                     [&](const auto& c) { return c.row == row && c.shift == s; });
        if (n != 1) return false;
      }
    return true;
  };
  o.Require(r.branch_cells.size() == 28 && complete(rows, r.branch_cells), "7x4 grid incomplete");
  o.Require(r.mdrb_cells.size() == 12 && complete(r.mdrb_rows, r.mdrb_cells), "3x4 grid incomplete");
  o.Require(r.BranchCsv().rfind("branches,acc_128,ccc_128,acc_256,ccc_256,acc_384,ccc_384,acc_512,ccc_512\n", 0) == 0,
            "branch csv header");

  // At shared weights the combined MDRB equals the mean of its two
  // single-branch outputs, and the fused model equals the mean of its
  // single-branch models.
  std::mt19937_64 rng(11);
  ModelConfig cfg = opt.model;
  const FusionModel full = BuildModel(cfg);
  const Features f = ExtractFeatures(testing::RandomMatrix(512, kNumChannels, rng, 5.0),
                                     full.normalization());
  bool exact = true;
  for (const auto* fb : {&*full.b1_branch(), &*full.b2_branch()}) {
    const Tensor& block = fb == &*full.b1_branch() ? f.block_b1 : f.block_b2;
    for (const Mdrb* m : {&fb->first()}) {
      const Tensor both = m->Forward(block, MdrbMode::kCombined);
      const Tensor one = m->Forward(block, MdrbMode::kBranch1);
      const Tensor two = m->Forward(block, MdrbMode::kBranch2);
      for (std::size_t i = 0; i < both.numel(); ++i) {
        exact &= both.values()[i] == (one.values()[i] + two.values()[i]) / 2.0;
      }
    }
  }
  o.Require(exact, "combined MDRB differs from the branch mean");
  const Tensor fused = full.Forward(f);
  double sum[3] = {0, 0, 0};
  for (const char* b : {"time", "b1", "b2"}) {
    const Tensor p = full.WithBranches(BranchSet::Parse(b)).Forward(f);
    for (std::size_t i = 0; i < 3; ++i) sum[i] += p.values()[i];
  }
  bool fused_ok = true;
  for (std::size_t i = 0; i < 3; ++i) fused_ok &= fused.values()[i] == sum[i] * (1.0 / 3.0);
  o.Require(fused_ok, "fused prediction differs from the single-branch mean");
  o.detail << r.branch_cells.size() << " branch cells (7x4), " << r.mdrb_cells.size()
           << " MDRB-mode cells (3x4); mean identities exact";
}

// 10. Ingest of a STEW directory, or a STEW-shaped stand-in.
void StewIngest(Outcome& o) {
  testing::TempDir dir;
  RunConfig c;
  const char* stew = std::getenv("MWL_STEW_DIR");
  const bool real = stew && *stew;
  if (real) {
    c.data = stew;
  } else {
    c.participants = 48;
    c.unrated = 3;
    c.seconds = 20;
    c.out = (dir / "data").string();
    CmdSynth(c);
    c.data = c.out;
  }
  c.out = (dir / "ds").string();
  CmdPreprocess(c);
  const json m = json::parse(testing::ReadFile(dir / "ds" / "manifest.json"));
  const std::size_t train = m["split"]["train"].size() + m["split"]["val"].size();
  const std::size_t test = m["split"]["test"].size();
  o.Require(train + test == 45, std::to_string(train + test) + " rated participants");
  o.Require(train == 36 && test == 9,
            "split " + std::to_string(train) + "/" + std::to_string(test));
  std::size_t mismatches = 0;
  for (const auto& r : m["records"]) {
    const auto expected = CountWindows(r["samples"].get<std::size_t>(), 512, 128);
    mismatches += r["windows"].get<std::size_t>() != expected;
  }
  o.Require(mismatches == 0, std::to_string(mismatches) + " files with a wrong window count");
  o.detail << (real ? "STEW corpus: " : "STEW-shaped synthetic stand-in (corpus not supplied): ")
           << train + test << " rated participants, split " << train << "/" << test << ", "
           << m["records"].size() << " files match floor((n-512)/128)+1";
}

}  // namespace
}  // namespace mwl

int main() {
  struct Criterion {
    int id;
    const char* name;
    void (*fn)(mwl::Outcome&);
  };
  const Criterion criteria[] = {
      {1, "spectral oracle", mwl::SpectralOracle},
      {2, "electrode grid mapping", mwl::GridMapping},
      {3, "band bin counting", mwl::BandCounting},
      {4, "depth schedule", mwl::DepthSchedules},
      {5, "gradient correctness", mwl::Gradients},
      {6, "TCN causality and receptive field", mwl::TcnContract},
      {7, "CCC", mwl::CccChecks},
      {8, "end-to-end learning", mwl::EndToEnd},
      {9, "ablation harness", mwl::Ablation},
      {10, "STEW ingest and split", mwl::StewIngest},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    mwl::Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.fn(o);
    } catch (const std::exception& e) {
      o.Require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << ": "
              << o.detail.str() << " (" << secs << " s)" << std::endl;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed"
                       : std::string("acceptance: all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
