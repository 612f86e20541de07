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
// Parameter checkpoints: <prefix>.bin holds the raw little-endian float64
// values of every tensor back to back; <prefix>.json lists name, shape,
// byte offset and dtype for each.

#ifndef MWL_CHECKPOINT_HPP_
#define MWL_CHECKPOINT_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mwl/autodiff.hpp"

namespace mwl::ad {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

void SaveCheckpoint(const std::filesystem::path& prefix,
                    std::span<const NamedTensor> tensors);

// Returns leaves (requires_grad = true) in manifest order. Throws IoError /
// ParseError on missing files or a manifest inconsistent with the payload.
std::vector<NamedTensor> LoadCheckpoint(const std::filesystem::path& prefix);

// Copies loaded values into `targets` by name. Throws ConfigError on a
// missing name, an unexpected extra name, or a shape mismatch.
void AssignByName(std::span<const NamedTensor> loaded,
                  std::span<NamedTensor> targets);

}  // namespace mwl::ad

#endif  // MWL_CHECKPOINT_HPP_
