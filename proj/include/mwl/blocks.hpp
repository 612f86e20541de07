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
// Network building blocks: the multi-dimensional residual block (MDRB) and
// the frequency branch built from two of them, and the dilated causal TCN
// used on raw time-domain windows.

#ifndef MWL_BLOCKS_HPP_
#define MWL_BLOCKS_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mwl/autodiff.hpp"
#include "mwl/checkpoint.hpp"

namespace mwl {

using ParamList = std::vector<ad::NamedTensor>;

// Kernel depths for the two stacked MDRBs of a frequency branch. With zero
// depth padding, unit dilation and unit stride:
//   d1    = ceil(d_in / 2)
//   d_out = d_in - d1 + 1       (depth after the first MDRB)
//   d2    = d_in - d_out        (kernel depth of the second MDRB)
struct DepthSchedule {
  std::size_t d_in = 0;
  std::size_t d1 = 0;
  std::size_t d_out = 0;
  std::size_t d2 = 0;

  // Depth after the second MDRB.
  std::size_t final_depth() const { return d_out - d2 + 1; }
};

// Throws ConfigError when any resulting depth is not positive.
DepthSchedule ComputeDepthSchedule(std::size_t d_in);

enum class HeadKind { kClass3, kCont };
std::string_view HeadKindName(HeadKind kind);
HeadKind ParseHeadKind(std::string_view name);

enum class MdrbMode { kCombined, kBranch1, kBranch2 };
std::string_view MdrbModeName(MdrbMode mode);
MdrbMode ParseMdrbMode(std::string_view name);

// Uniform fan-in initializer. Weights feeding a ReLU draw from
// U(-sqrt(6/fan_in), sqrt(6/fan_in)); output heads use sqrt(3/fan_in).
// Biases start at zero.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}
  ad::Tensor Weight(ad::Shape shape, std::size_t fan_in, bool relu = true);
  ad::Tensor Bias(std::size_t n);

 private:
  std::mt19937_64 rng_;
};

struct MdrbConfig {
  std::size_t h = 3;
  std::size_t w = 3;
  std::size_t d = 1;
  std::size_t filters = 32;
};

// Two parallel paths over a [6, 6, D, C] volume:
//   branch 1: conv h x w x d -> ReLU
//   branch 2: conv 1 x 1 x d -> ReLU -> conv h x w x 1 -> ReLU
// Combined output is the elementwise mean of the two, [6, 6, D-d+1, F].
class Mdrb {
 public:
  Mdrb(const MdrbConfig& config, std::size_t in_channels, Initializer& init);

  ad::Tensor Forward(const ad::Tensor& x, MdrbMode mode = MdrbMode::kCombined) const;
  ad::Tensor Branch1(const ad::Tensor& x) const;
  ad::Tensor Branch2(const ad::Tensor& x) const;

  const MdrbConfig& config() const { return config_; }
  void CollectParams(const std::string& prefix, ParamList& out) const;

  // Branch parameter groups, exposed for ablation tests.
  std::vector<ad::Tensor> Branch1Params() const { return {k1_, b1_}; }
  std::vector<ad::Tensor> Branch2Params() const { return {k2a_, b2a_, k2b_, b2b_}; }

 private:
  MdrbConfig config_;
  ad::Tensor k1_, b1_;
  ad::Tensor k2a_, b2a_;
  ad::Tensor k2b_, b2b_;
};

// Fully connected layer plus softmax (3 classes) or sigmoid (1 level).
class Head {
 public:
  Head(std::size_t in_features, HeadKind kind, Initializer& init);
  ad::Tensor Logits(const ad::Tensor& features) const;
  ad::Tensor Forward(const ad::Tensor& features) const;
  HeadKind kind() const { return kind_; }
  void CollectParams(const std::string& prefix, ParamList& out) const;

 private:
  HeadKind kind_;
  ad::Tensor weight_, bias_;
};

// Block [6, 6, K, 1] -> MDRB(d1) -> MDRB(d2) -> global average pool -> head.
class FreqBranch {
 public:
  FreqBranch(std::size_t depth, std::size_t filters, HeadKind head,
             Initializer& init, MdrbMode mode = MdrbMode::kCombined);

  ad::Tensor Features(const ad::Tensor& block) const;
  ad::Tensor Forward(const ad::Tensor& block) const;

  const DepthSchedule& schedule() const { return schedule_; }
  MdrbMode mode() const { return mode_; }
  void set_mode(MdrbMode mode) { mode_ = mode; }
  const Mdrb& first() const { return first_; }
  const Mdrb& second() const { return second_; }
  const Head& head() const { return head_; }
  void CollectParams(const std::string& prefix, ParamList& out) const;

 private:
  DepthSchedule schedule_;
  MdrbMode mode_;
  Mdrb first_;
  Mdrb second_;
  Head head_;
};

struct TcnConfig {
  std::size_t kernel = 2;
  std::size_t filters = 128;
  std::size_t stacks = 2;
  std::vector<std::size_t> dilations = {1, 2, 4, 8};

  static constexpr std::size_t kConvsPerBlock = 2;
  // 1 + convs_per_block * (kernel - 1) * stacks * sum(dilations).
  std::size_t ReceptiveField() const;
  void Validate() const;
};

// Residual block: two dilated causal convs each followed by ReLU, added to
// the input (through a 1x1 projection when the channel count changes),
// then ReLU. The head reads the last time step.
class TcnBranch {
 public:
  TcnBranch(const TcnConfig& config, std::size_t in_channels, HeadKind head,
            Initializer& init);

  // [T, C] -> [T, filters]
  ad::Tensor Sequence(const ad::Tensor& window) const;
  ad::Tensor Features(const ad::Tensor& window) const;
  ad::Tensor Forward(const ad::Tensor& window) const;

  const TcnConfig& config() const { return config_; }
  const Head& head() const { return head_; }
  void CollectParams(const std::string& prefix, ParamList& out) const;

 private:
  struct Block {
    std::size_t dilation;
    ad::Tensor k1, b1, k2, b2;
    ad::Tensor proj_k, proj_b;  // undefined when channels already match
  };
  TcnConfig config_;
  std::vector<Block> blocks_;
  Head head_;
};

}  // namespace mwl

#endif  // MWL_BLOCKS_HPP_
