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
// A small reverse-mode differentiation engine over float64 tensors.
//
// A Tensor is a shared handle to a graph node. Leaves (parameters, inputs)
// are created directly; every op result records its parents and a backward
// rule. Backward() on a scalar walks the graph once in reverse topological
// order and accumulates into each node's gradient buffer, so a value that
// feeds several consumers receives the sum of their contributions.
// Gradients on leaves persist across calls until ZeroGrad().

#ifndef MWL_AUTODIFF_HPP_
#define MWL_AUTODIFF_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mwl::ad {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

class Tensor;

// Receives the node's output gradient and must add into the parents'
// gradient buffers (Tensor::grad_buffer()).
using BackwardFn =
    std::function<void(std::span<const double> out_grad, std::vector<Tensor>& parents)>;

class Tensor {
 public:
  Tensor() = default;

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor FromValues(Shape shape, std::vector<double> values,
                           bool requires_grad = false);
  static Tensor Scalar(double value, bool requires_grad = false);

  // Builds an op result. Parents and the backward rule are dropped when no
  // parent requires a gradient or gradient recording is disabled. Throws
  // NumericError when `values` holds NaN or Inf.
  static Tensor MakeResult(const char* op, Shape shape, std::vector<double> values,
                           std::vector<Tensor> parents, BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t i) const { return shape().at(i); }
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;

  std::span<const double> values() const;
  // Direct write access, intended for parameters and optimizer updates.
  std::span<double> mutable_values();
  double item() const;

  bool requires_grad() const;
  // Empty until a backward pass reaches this node.
  std::span<const double> grad() const;
  // Allocates (zeroed) on first use.
  std::span<double> grad_buffer();
  void ZeroGrad();

  void Backward();

  // Independent leaf with the same shape, values and requires_grad flag.
  Tensor Clone() const;

  bool SameNode(const Tensor& other) const { return node_ == other.node_; }

 private:
  struct Node;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

// Disables graph recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool GradEnabled();

}  // namespace mwl::ad

#endif  // MWL_AUTODIFF_HPP_
