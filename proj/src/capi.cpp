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

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <new>
#include <string>

#include "json.hpp"
#include "mwl/error.hpp"
#include "mwl/model.hpp"
#include "mwl/pipeline.hpp"
#include "mwl/spectral.hpp"

struct mwl_model {
  mwl::FusionModel model;
};

namespace {

thread_local std::string g_last_error;

mwl_status Fail(mwl_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
mwl_status Guard(F&& body) {
  try {
    g_last_error.clear();
    body();
    return MWL_OK;
  } catch (const mwl::Error& e) {
    return Fail(static_cast<mwl_status>(e.kind()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return Fail(MWL_ERR_INPUT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return Fail(MWL_ERR_INPUT, e.what());
  } catch (const std::bad_alloc&) {
    return Fail(MWL_ERR_GENERIC, "out of memory");
  } catch (const std::exception& e) {
    return Fail(MWL_ERR_GENERIC, e.what());
  } catch (...) {
    return Fail(MWL_ERR_GENERIC, "unknown error");
  }
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void RequireArg(const void* p, const char* name) {
  if (!p) throw mwl::ValidationError(std::string(name) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* mwl_version(void) { return "0.1.0"; }

const char* mwl_last_error(void) { return g_last_error.c_str(); }

void mwl_string_free(char* str) { std::free(str); }

mwl_status mwl_run(const char* command, const char* config_json, char** out_json) {
  if (out_json) *out_json = nullptr;
  return Guard([&] {
    RequireArg(command, "command");
    nlohmann::json j = nlohmann::json::object();
    if (config_json && *config_json) {
      try {
        j = nlohmann::json::parse(config_json);
      } catch (const nlohmann::json::exception& e) {
        throw mwl::ParseError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    const mwl::RunConfig config = mwl::RunConfig::FromJson(j);
    const nlohmann::json result = mwl::RunCommand(command, config);
    if (out_json) *out_json = CopyString(result.dump(2));
  });
}

mwl_status mwl_model_load(const char* dir, mwl_model** out) {
  if (out) *out = nullptr;
  return Guard([&] {
    RequireArg(dir, "dir");
    RequireArg(out, "out");
    *out = new mwl_model{mwl::LoadModel(dir)};
  });
}

void mwl_model_free(mwl_model* model) { delete model; }

mwl_status mwl_model_info(const mwl_model* model, char** out_json) {
  if (out_json) *out_json = nullptr;
  return Guard([&] {
    RequireArg(model, "model");
    RequireArg(out_json, "out_json");
    std::size_t n = 0;
    for (const auto& t : model->model.ParamTensors()) n += t.numel();
    const nlohmann::json j{{"config", model->model.config().ToJson()},
                           {"parameters", n}};
    *out_json = CopyString(j.dump(2));
  });
}

size_t mwl_model_window(const mwl_model* model) {
  return model ? model->model.config().window : 0;
}

size_t mwl_model_output_size(const mwl_model* model) {
  if (!model) return 0;
  return model->model.config().head == mwl::HeadKind::kClass3 ? 3 : 1;
}

mwl_status mwl_model_predict(const mwl_model* model, const double* samples,
                             size_t n_samples, double* out, size_t out_len) {
  return Guard([&] {
    RequireArg(model, "model");
    RequireArg(samples, "samples");
    RequireArg(out, "out");
    const auto& m = model->model;
    if (n_samples != m.config().window) {
      throw mwl::ValidationError("expected " + std::to_string(m.config().window) +
                                 " samples, got " + std::to_string(n_samples));
    }
    if (out_len < mwl_model_output_size(model)) {
      throw mwl::ValidationError("output buffer too small");
    }
    mwl::Matrix window(n_samples, mwl::kNumChannels,
                       std::vector<double>(samples, samples + n_samples * mwl::kNumChannels));
    mwl::ad::NoGradGuard no_grad;
    const mwl::ad::Tensor pred = m.Forward(window);
    const auto values = pred.values();
    std::copy(values.begin(), values.end(), out);
  });
}

mwl_status mwl_welch_psd(const double* samples, size_t n_samples, size_t n_channels,
                         size_t nfft, double fs, double* out, size_t out_len) {
  return Guard([&] {
    RequireArg(samples, "samples");
    RequireArg(out, "out");
    mwl::Matrix window(n_samples, n_channels,
                       std::vector<double>(samples, samples + n_samples * n_channels));
    const mwl::Spectrum s = mwl::WelchPsd(window, nfft, fs);
    const auto flat = s.psd.data();
    if (out_len < flat.size()) throw mwl::ValidationError("output buffer too small");
    std::copy(flat.begin(), flat.end(), out);
  });
}

mwl_status mwl_block3d(const double* samples, size_t n_samples, size_t nfft,
                       double* out, size_t out_len, size_t* depth) {
  return Guard([&] {
    RequireArg(samples, "samples");
    RequireArg(out, "out");
    mwl::Matrix window(n_samples, mwl::kNumChannels,
                       std::vector<double>(samples, samples + n_samples * mwl::kNumChannels));
    const mwl::Block3D block = mwl::BuildBlock3d(mwl::ExtractBands(mwl::WelchPsd(window, nfft)));
    if (depth) *depth = block.depth();
    if (out_len < block.values.size()) throw mwl::ValidationError("output buffer too small");
    std::copy(block.values.begin(), block.values.end(), out);
  });
}

}  // extern "C"
