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

#include "mwl/optim.hpp"

#include <cmath>
#include <string>

#include "mwl/error.hpp"

namespace mwl::ad {

void AdamStep(std::span<Tensor> params, AdamState& state,
              const AdamOptions& options) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.numel(), 0.0);
      state.v.emplace_back(p.numel(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("Adam state tracks " + std::to_string(state.m.size()) +
                     " tensors, given " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].size() != params[i].numel()) {
      throw ShapeError("Adam state shape mismatch at parameter " + std::to_string(i));
    }
    for (double g : params[i].grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient at parameter " + std::to_string(i));
      }
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(options.beta1, t);
  const double c2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].mutable_values();
    const auto g = params[i].grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = g.empty() ? 0.0 : g[k];
      m[k] = options.beta1 * m[k] + (1.0 - options.beta1) * gk;
      v[k] = options.beta2 * v[k] + (1.0 - options.beta2) * gk * gk;
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      w[k] -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

void ZeroGrads(std::span<Tensor> params) {
  for (auto& p : params) p.ZeroGrad();
}

}  // namespace mwl::ad
