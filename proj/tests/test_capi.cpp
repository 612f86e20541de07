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

#include "mwl/mwl.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

namespace {

using nlohmann::json;
using mwl::testing::TempDir;

// Runs a command and returns its parsed summary; fails the test on error.
json Run(const std::string& command, const json& config) {
  char* out = nullptr;
  const mwl_status s = mwl_run(command.c_str(), config.dump().c_str(), &out);
  INFO(mwl_last_error());
  REQUIRE(s == MWL_OK);
  REQUIRE(out != nullptr);
  json j = json::parse(out);
  mwl_string_free(out);
  return j;
}

mwl_status RunStatus(const std::string& command, const json& config) {
  return mwl_run(command.c_str(), config.dump().c_str(), nullptr);
}

const json kTinyModel = {{"window", 128},        {"shift", 128},      {"tcn_filters", 2},
                         {"tcn_stacks", 1},      {"tcn_dilations", {1, 2}},
                         {"mdrb_filters", 2},    {"epochs", 1},       {"batch", 16}};

TEST_CASE("version and status codes") {
  CHECK(std::strlen(mwl_version()) > 0);
  CHECK(MWL_OK == 0);
  CHECK(MWL_ERR_INPUT == 2);
  CHECK(MWL_ERR_TRAINING == 3);
  CHECK(MWL_ERR_CONFIG == 4);
}

TEST_CASE("run rejects bad requests") {
  CHECK(RunStatus("fly", json::object()) == MWL_ERR_CONFIG);
  CHECK(std::string(mwl_last_error()).find("fly") != std::string::npos);
  CHECK(mwl_run("synth", "{not json", nullptr) == MWL_ERR_INPUT);
  CHECK(RunStatus("synth", {{"colour", "red"}}) == MWL_ERR_INPUT);
  CHECK(std::string(mwl_last_error()).find("colour") != std::string::npos);
  CHECK(RunStatus("synth", {{"window", "wide"}}) == MWL_ERR_INPUT);
  CHECK(mwl_run(nullptr, "{}", nullptr) == MWL_ERR_INPUT);
}

TEST_CASE("missing ratings file names the path") {
  TempDir dir;
  Run("synth", {{"out", (dir / "data").string()}, {"participants", 2}, {"seconds", 5}});
  std::filesystem::remove(dir / "data" / "ratings.txt");
  CHECK(RunStatus("preprocess", {{"data", (dir / "data").string()}, {"out", (dir / "ds").string()}}) ==
        MWL_ERR_INPUT);
  CHECK(std::string(mwl_last_error()).find("ratings.txt") != std::string::npos);
}

TEST_CASE("welch psd through the c interface") {
  const std::size_t n = 64;
  std::vector<double> x(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    x[i * 2] = std::sin(0.3 * double(i)) + 0.1 * double(i % 7);
    x[i * 2 + 1] = 1.0;
  }
  std::vector<double> psd(33 * 2);
  REQUIRE(mwl_welch_psd(x.data(), n, 2, 64, 128.0, psd.data(), psd.size()) == MWL_OK);
  double wss = 0.0;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2 * M_PI * double(i) / double(n));
    wss += w[i] * w[i];
  }
  for (std::size_t k = 0; k <= 32; ++k) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
      re += x[i * 2] * w[i] * std::cos(2 * M_PI * double(k * i) / double(n));
      im -= x[i * 2] * w[i] * std::sin(2 * M_PI * double(k * i) / double(n));
    }
    const double ref = (k == 0 || k == 32 ? 1.0 : 2.0) * (re * re + im * im) / (128.0 * wss);
    CHECK(psd[k * 2] == doctest::Approx(ref).epsilon(1e-9));
  }
  CHECK(mwl_welch_psd(x.data(), n, 2, 64, 128.0, psd.data(), 10) == MWL_ERR_INPUT);
  CHECK(mwl_welch_psd(x.data(), n, 2, 48, 128.0, psd.data(), psd.size()) == MWL_ERR_CONFIG);
}

TEST_CASE("block through the c interface") {
  std::vector<double> x(512 * 14);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.01 * double(i * i % 977));
  std::vector<double> block(36 * 44);
  std::size_t depth = 0;
  REQUIRE(mwl_block3d(x.data(), 512, 128, block.data(), block.size(), &depth) == MWL_OK);
  CHECK(depth == 44);
  CHECK(block[0] == 0.0);                  // cell (0, 0) is empty
  CHECK(block[(0 * 6 + 2) * 44 + 5] > 0);  // AF3
  REQUIRE(mwl_block3d(x.data(), 512, 64, block.data(), block.size(), &depth) == MWL_OK);
  CHECK(depth == 22);
}

TEST_CASE("train, load and predict through handles") {
  TempDir dir;
  const std::string data = (dir / "data").string(), ds = (dir / "ds").string(),
                    run = (dir / "run").string();
  Run("synth", {{"out", data}, {"participants", 3}, {"seconds", 3}});
  json pre = kTinyModel;
  pre["data"] = data;
  pre["out"] = ds;
  CHECK(Run("preprocess", pre)["participants"] == 3);
  json train = kTinyModel;
  train["dataset"] = ds;
  train["out"] = run;
  Run("train", train);

  mwl_model* model = nullptr;
  CHECK(mwl_model_load((dir / "nowhere").string().c_str(), &model) == MWL_ERR_INPUT);
  CHECK(model == nullptr);
  REQUIRE(mwl_model_load((dir / "run" / "checkpoint").string().c_str(), &model) == MWL_OK);
  CHECK(mwl_model_window(model) == 128);
  CHECK(mwl_model_output_size(model) == 3);
  char* info = nullptr;
  REQUIRE(mwl_model_info(model, &info) == MWL_OK);
  CHECK(json::parse(info)["config"]["head"] == "class3");
  mwl_string_free(info);

  std::vector<double> window(128 * 14, 0.5);
  double probs[3] = {};
  REQUIRE(mwl_model_predict(model, window.data(), 128, probs, 3) == MWL_OK);
  CHECK(probs[0] + probs[1] + probs[2] == doctest::Approx(1.0));
  CHECK(mwl_model_predict(model, window.data(), 100, probs, 3) == MWL_ERR_INPUT);
  CHECK(mwl_model_predict(model, window.data(), 128, probs, 2) == MWL_ERR_INPUT);
  mwl_model_free(model);
  mwl_model_free(nullptr);
}

}  // namespace
