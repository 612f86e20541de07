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
#include <random>

#include "doctest.h"
#include "mwl/error.hpp"

namespace mwl {
namespace {

// Concordance written as Pearson correlation scaled by the bias terms.
double CccFromPearson(const std::vector<double>& p, const std::vector<double>& y) {
  const double n = double(p.size());
  double mp = 0, my = 0;
  for (std::size_t i = 0; i < p.size(); ++i) mp += p[i] / n, my += y[i] / n;
  double sp = 0, sy = 0, sxy = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sp += (p[i] - mp) * (p[i] - mp);
    sy += (y[i] - my) * (y[i] - my);
    sxy += (p[i] - mp) * (y[i] - my);
  }
  const double rho = sxy / std::sqrt(sp * sy);
  const double sdp = std::sqrt(sp / n), sdy = std::sqrt(sy / n);
  return 2 * rho * sdp * sdy / (sdp * sdp + sdy * sdy + (mp - my) * (mp - my));
}

struct TinyData {
  std::vector<EegRecord> train, val, test;
};

TinyData MakeTinyData() {
  SyntheticOptions opt;
  opt.n_participants = 4;
  opt.seconds = 6;
  opt.separability = 3.0;
  auto recs = GenerateSynthetic(opt);
  TinyData d;
  for (auto& r : recs) {
    auto& bucket = r.participant_id <= 2 ? d.train : (r.participant_id == 3 ? d.val : d.test);
    bucket.push_back(std::move(r));
  }
  return d;
}

ModelConfig TinyModel(HeadKind head) {
  ModelConfig c;
  c.head = head;
  c.mdrb_filters = 2;
  c.tcn = {.kernel = 2, .filters = 3, .stacks = 1, .dilations = {1, 2}};
  c.window = 128;
  return c;
}

std::vector<Sample> SamplesOf(const std::vector<EegRecord>& recs, const NormalizationStats& n) {
  std::vector<Window> ws;
  for (const auto& r : recs) {
    auto w = MakeWindows(r, 128, 64);
    ws.insert(ws.end(), w.begin(), w.end());
  }
  return PrepareSamples(ws, n);
}

TEST_CASE("ccc trivial cases are exact") {
  const std::vector<double> y = {0.1, 0.4, 0.35, 0.9, 0.0};
  CHECK(Ccc(y, y).value == 1.0);
  const std::vector<double> centered = {-1.5, 2.0, 0.5, -1.0, 0.0};
  std::vector<double> negated;
  for (double v : centered) negated.push_back(-v);
  CHECK(Ccc(negated, centered).value == -1.0);
  const std::vector<double> constant(5, 0.3);
  const CccResult flat = Ccc(constant, y);
  CHECK(flat.value == 0.0);
  CHECK_FALSE(flat.degenerate);
  const CccResult both = Ccc(constant, constant);
  CHECK(both.value == 0.0);
  CHECK(both.degenerate);
  CHECK_THROWS_AS(Ccc(std::vector<double>{1.0}, std::vector<double>{1.0}), ValidationError);
  CHECK_THROWS_AS(Ccc(y, std::vector<double>(4, 0.0)), ValidationError);
}

TEST_CASE("ccc agrees with the correlation form") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 50;
    std::vector<double> p(n), y(n);
    const double shift = dist(rng), scale = std::exp(dist(rng));
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = dist(rng);
      p[i] = shift + scale * (0.5 * y[i] + dist(rng));
    }
    CHECK(std::abs(Ccc(p, y).value - CccFromPearson(p, y)) <= 1e-12);
  }
}

TEST_CASE("accuracy") {
  const int p[] = {0, 1, 2, 2};
  const int y[] = {0, 1, 1, 2};
  CHECK(Accuracy(p, y) == 0.75);
  CHECK_THROWS_AS(Accuracy(std::span<const int>(p, 3), y), ValidationError);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK(TrainConfig::DefaultLr(HeadKind::kClass3) == 1e-3);
  CHECK(TrainConfig::DefaultLr(HeadKind::kCont) == 1e-4);
  c.lr = 0.0;
  CHECK_NOTHROW(c.Validate());
  c.lr = -1e-3;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c = {};
  c.epochs = 0;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
}

TEST_CASE("training lowers the loss and restores the best epoch") {
  const TinyData d = MakeTinyData();
  std::vector<Window> train_w;
  for (const auto& r : d.train) {
    auto w = MakeWindows(r, 128, 64);
    train_w.insert(train_w.end(), w.begin(), w.end());
  }
  const NormalizationStats norm = ComputeNormalization(train_w);
  const auto train = SamplesOf(d.train, norm), val = SamplesOf(d.val, norm);

  FusionModel m = BuildModel(TinyModel(HeadKind::kClass3));
  const double before = MeanLoss(m, train);
  TrainConfig tc;
  tc.epochs = 6;
  tc.batch_size = 8;
  tc.patience = 100;
  int calls = 0;
  const History h = Train(m, train, val, tc, [&](const EpochRecord&) { ++calls; });
  CHECK(calls == 6);
  CHECK(h.epochs.size() == 6);
  CHECK(MeanLoss(m, train) < before);
  CHECK(MeanLoss(m, val) == doctest::Approx(h.best_val_loss).epsilon(1e-12));
  double best = 1e300;
  for (const auto& e : h.epochs) best = std::min(best, e.val_loss);
  CHECK(h.best_val_loss == best);

  FusionModel again = BuildModel(TinyModel(HeadKind::kClass3));
  const History h2 = Train(again, train, val, tc);
  for (std::size_t i = 0; i < h.epochs.size(); ++i) {
    CHECK(h.epochs[i].val_loss == h2.epochs[i].val_loss);
  }
}

TEST_CASE("early stopping and the train-loss fallback") {
  const TinyData d = MakeTinyData();
  const auto norm = NormalizationStats::Identity();
  const auto train = SamplesOf(d.train, norm), val = SamplesOf(d.val, norm);
  FusionModel m = BuildModel(TinyModel(HeadKind::kCont));
  TrainConfig tc;
  tc.lr = 0.0;
  tc.epochs = 20;
  tc.patience = 3;
  const History h = Train(m, train, val, tc);
  CHECK(h.epochs.size() == 4);
  CHECK(h.best_epoch == 1);
  CHECK(h.stopped_early);

  tc.epochs = 2;
  const History no_val = Train(m, train, {}, tc);
  CHECK(no_val.selected_on_train);
  CHECK(no_val.epochs[0].val_loss == no_val.epochs[0].train_loss);
  CHECK_THROWS_AS(Train(m, {}, val, tc), ValidationError);
}

TEST_CASE("divergence reports the epoch") {
  const TinyData d = MakeTinyData();
  const auto norm = NormalizationStats::Identity();
  const auto train = SamplesOf(d.train, norm);
  FusionModel m = BuildModel(TinyModel(HeadKind::kCont));
  TrainConfig tc;
  tc.lr = 1e300;
  tc.epochs = 5;
  try {
    Train(m, train, {}, tc);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(e.epoch() >= 1);
    CHECK(e.kind() == ErrorKind::kTraining);
  }
}

TEST_CASE("evaluation reports") {
  const TinyData d = MakeTinyData();
  const auto norm = NormalizationStats::Identity();
  const auto test = SamplesOf(d.test, norm);
  const FusionModel cls = BuildModel(TinyModel(HeadKind::kClass3));
  const EvalReport r = Evaluate(cls, test, HeadKind::kClass3);
  std::size_t total = 0, hits = 0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) total += r.confusion[i][j], hits += i == j ? r.confusion[i][j] : 0;
  CHECK(total == test.size());
  CHECK(*r.accuracy == doctest::Approx(double(hits) / double(total)));
  CHECK(r.ToJson().contains("confusion"));
  CHECK(r.ToCsv().rfind("task,n_samples,accuracy,", 0) == 0);
  CHECK_THROWS_AS(Evaluate(cls, test, HeadKind::kCont), ConfigError);

  const FusionModel reg = BuildModel(TinyModel(HeadKind::kCont));
  const EvalReport rr = Evaluate(reg, test, HeadKind::kCont);
  CHECK(rr.ccc.has_value());
  CHECK(rr.ToJson().contains("ccc"));
  CHECK_FALSE(rr.accuracy.has_value());
}

TEST_CASE("ablation grid shape and cell reproducibility") {
  const TinyData d = MakeTinyData();
  AblationData data{d.train, d.val, d.test, 128, 64};
  AblationOptions opt;
  opt.shifts = {64, 128};
  opt.model = TinyModel(HeadKind::kClass3);
  opt.class_train.epochs = 1;
  opt.cont_train.epochs = 1;
  opt.cont_train.lr = 1e-4;
  const AblationResult r = RunAblation(data, opt);
  CHECK(r.branch_cells.size() == 14);
  CHECK(r.mdrb_cells.size() == 6);
  CHECK(r.branch_rows.size() == 7);
  CHECK(r.mdrb_rows == std::vector<std::string>{"branch1", "branch2", "combined"});

  const AblationCell single =
      RunAblationCell(data, BranchSet::Parse("b1+b2"), MdrbMode::kCombined, 128, opt);
  const auto it = std::find_if(r.branch_cells.begin(), r.branch_cells.end(), [](const auto& c) {
    return c.row == "b1+b2" && c.shift == 128;
  });
  REQUIRE(it != r.branch_cells.end());
  CHECK(single.accuracy == it->accuracy);
  CHECK(single.ccc == it->ccc);

  const std::string csv = r.BranchCsv();
  CHECK(csv.substr(0, csv.find('\n')) == "branches,acc_64,ccc_64,acc_128,ccc_128");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
}

}  // namespace
}  // namespace mwl
