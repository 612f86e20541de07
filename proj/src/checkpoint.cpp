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

#include "mwl/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <cstring>
#include <iterator>
#include <map>

#include "json.hpp"
#include "mwl/error.hpp"

namespace mwl::ad {

namespace {

std::filesystem::path WithSuffix(const std::filesystem::path& prefix,
                                 const char* suffix) {
  return std::filesystem::path(prefix.string() + suffix);
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& prefix,
                    std::span<const NamedTensor> tensors) {
  static_assert(std::endian::native == std::endian::little);
  const auto bin_path = WithSuffix(prefix, ".bin");
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw IoError("cannot write " + bin_path.string());

  nlohmann::json entries = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& nt : tensors) {
    const auto v = nt.tensor.values();
    bin.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
    entries.push_back({{"name", nt.name},
                       {"shape", nt.tensor.shape()},
                       {"offset", offset},
                       {"dtype", "float64"}});
    offset += v.size() * sizeof(double);
  }
  if (!bin) throw IoError("write failed for " + bin_path.string());

  const auto json_path = WithSuffix(prefix, ".json");
  std::ofstream meta(json_path);
  if (!meta) throw IoError("cannot write " + json_path.string());
  meta << nlohmann::json{{"format", "mwl-checkpoint-v1"},
                         {"byte_order", "little"},
                         {"total_bytes", offset},
                         {"tensors", entries}}
              .dump(2)
       << '\n';
}

std::vector<NamedTensor> LoadCheckpoint(const std::filesystem::path& prefix) {
  const auto json_path = WithSuffix(prefix, ".json");
  const auto bin_path = WithSuffix(prefix, ".bin");
  std::ifstream meta_in(json_path);
  if (!meta_in) throw IoError("cannot open " + json_path.string());
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(json_path.string() + ": " + e.what());
  }

  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw IoError("cannot open " + bin_path.string());
  std::vector<char> payload((std::istreambuf_iterator<char>(bin)),
                            std::istreambuf_iterator<char>());

  std::vector<NamedTensor> out;
  try {
    for (const auto& e : meta.at("tensors")) {
      if (e.at("dtype") != "float64") {
        throw ParseError(json_path.string() + ": unsupported dtype");
      }
      Shape shape = e.at("shape").get<Shape>();
      const auto offset = e.at("offset").get<std::size_t>();
      const std::size_t n = NumElements(shape);
      if (offset + n * sizeof(double) > payload.size()) {
        throw ParseError(json_path.string() + ": tensor '" +
                         e.at("name").get<std::string>() +
                         "' runs past the end of " + bin_path.string());
      }
      std::vector<double> values(n);
      std::memcpy(values.data(), payload.data() + offset, n * sizeof(double));
      out.push_back({e.at("name").get<std::string>(),
                     Tensor::FromValues(std::move(shape), std::move(values), true)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(json_path.string() + ": " + e.what());
  }
  return out;
}

void AssignByName(std::span<const NamedTensor> loaded,
                  std::span<NamedTensor> targets) {
  std::map<std::string, const NamedTensor*> by_name;
  for (const auto& nt : loaded) by_name[nt.name] = &nt;
  if (by_name.size() != targets.size()) {
    throw ConfigError("checkpoint holds " + std::to_string(by_name.size()) +
                      " tensors, model expects " + std::to_string(targets.size()));
  }
  for (auto& t : targets) {
    const auto it = by_name.find(t.name);
    if (it == by_name.end()) {
      throw ConfigError("checkpoint lacks tensor '" + t.name + "'");
    }
    const Tensor& src = it->second->tensor;
    if (src.shape() != t.tensor.shape()) {
      throw ConfigError("tensor '" + t.name + "' has shape " +
                        ShapeString(src.shape()) + " in checkpoint, model expects " +
                        ShapeString(t.tensor.shape()));
    }
    std::copy(src.values().begin(), src.values().end(),
              t.tensor.mutable_values().begin());
  }
}

}  // namespace mwl::ad
