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

#include "mwl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mwl/optim.hpp"

namespace mwl::ad {

GradCheckResult FiniteDiffCheck(const std::function<Tensor()>& fn,
                                std::span<Tensor> params, double eps,
                                double floor) {
  ZeroGrads(params);
  fn().Backward();
  std::vector<std::vector<double>> analytic;
  for (const auto& p : params) {
    const auto g = p.grad();
    analytic.emplace_back(g.begin(), g.end());
    analytic.back().resize(p.numel(), 0.0);
  }

  GradCheckResult result;
  NoGradGuard no_grad;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].mutable_values();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double saved = w[k];
      w[k] = saved + eps;
      const double up = fn().item();
      w[k] = saved - eps;
      const double down = fn().item();
      w[k] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[i][k];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      const double err = std::abs(a - numeric) / denom;
      ++result.checked;
      if (err > result.max_rel_error || result.checked == 1) {
        result.max_rel_error = err;
        result.param_index = i;
        result.element = k;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace mwl::ad
