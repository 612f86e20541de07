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

#ifndef MWL_OPTIM_HPP_
#define MWL_OPTIM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "mwl/autodiff.hpp"

namespace mwl::ad {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::int64_t step = 0;
};

// One bias-corrected Adam update of every parameter from its accumulated
// gradient (a missing gradient counts as zero). State is sized on first use.
// Throws NumericError on a non-finite gradient before touching anything.
void AdamStep(std::span<Tensor> params, AdamState& state,
              const AdamOptions& options);

void ZeroGrads(std::span<Tensor> params);

}  // namespace mwl::ad

#endif  // MWL_OPTIM_HPP_
