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

#ifndef MWL_GRADCHECK_HPP_
#define MWL_GRADCHECK_HPP_

#include <cstddef>
#include <functional>
#include <span>

#include "mwl/autodiff.hpp"

namespace mwl::ad {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t param_index = 0;  // location of the worst element
  std::size_t element = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// Compares the backward-pass gradient of the scalar `fn()` with respect to
// every element of `params` against central differences of step `eps`.
// Error per element is |a - n| / max(|a|, |n|, floor). `fn` must rebuild the
// graph from the current parameter values on each call.
GradCheckResult FiniteDiffCheck(const std::function<Tensor()>& fn,
                                std::span<Tensor> params, double eps = 1e-5,
                                double floor = 1e-6);

}  // namespace mwl::ad

#endif  // MWL_GRADCHECK_HPP_
