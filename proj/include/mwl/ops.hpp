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
// The op set used by the workload model. Shapes are channel-last:
// volumes are [H, W, D, C], sequences are [T, C].

#ifndef MWL_OPS_HPP_
#define MWL_OPS_HPP_

#include <cstddef>
#include <span>

#include "mwl/autodiff.hpp"

namespace mwl::ad {

enum class Padding { kSame, kValid };

// input [H, W, D, Cin], kernel [kh, kw, kd, Cin, Cout], bias [Cout] or
// undefined. Stride 1, no depth padding: output depth D - kd + 1. Spatial
// padding is zero "same" (output H x W) or "valid".
Tensor Conv3d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              Padding spatial = Padding::kSame);

// input [T, Cin], kernel [k, Cin, Cout], bias [Cout] or undefined. Left
// zero padding of (k - 1) * dilation keeps the length at T; output[t]
// reads input[t - (k - 1 - j) * dilation] through kernel tap j.
Tensor Conv1dCausal(const Tensor& input, const Tensor& kernel,
                    const Tensor& bias, std::size_t dilation);

// Flattens x to n values; weight [n, m], bias [m] or undefined -> [m].
Tensor Dense(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor Relu(const Tensor& x);
Tensor Sigmoid(const Tensor& x);
// Over the last axis, with max subtraction.
Tensor Softmax(const Tensor& x);
// [..., C] -> [C], averaging over every non-channel position.
Tensor GlobalAveragePool(const Tensor& x);
// Elementwise mean of equally shaped tensors.
Tensor Mean(std::span<const Tensor> xs);
Tensor MeanAll(const Tensor& x);
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& x, double factor);
// [T, C] -> [C] at t = T - 1.
Tensor LastStep(const Tensor& x);
// N tensors of shape S -> [N, S...].
Tensor Stack(std::span<const Tensor> xs);

// pred [N, C] probabilities (clamped to [1e-12, 1]), onehot [N, C]. Mean
// over rows of -sum_i y_i log(p_i). Throws ValidationError on a row that is
// not one-hot.
Tensor CrossEntropy(const Tensor& pred, const Tensor& onehot);
// Mean squared difference; both sides must hold the same element count.
Tensor Mse(const Tensor& pred, const Tensor& target);

}  // namespace mwl::ad

#endif  // MWL_OPS_HPP_
