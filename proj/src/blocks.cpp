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

#include "mwl/blocks.hpp"

#include <cmath>
#include <numeric>

#include "mwl/error.hpp"
#include "mwl/ops.hpp"

namespace mwl {

using ad::Tensor;

DepthSchedule ComputeDepthSchedule(std::size_t d_in) {
  if (d_in < 2) {
    throw ConfigError("depth schedule needs an input depth >= 2, got " +
                      std::to_string(d_in));
  }
  DepthSchedule s;
  s.d_in = d_in;
  s.d1 = (d_in + 1) / 2;
  s.d_out = d_in - s.d1 + 1;
  s.d2 = d_in - s.d_out;
  if (s.d2 == 0 || s.d2 > s.d_out) {
    throw ConfigError("depth schedule for input depth " + std::to_string(d_in) +
                      " gives second kernel depth " + std::to_string(s.d2));
  }
  return s;
}

std::string_view HeadKindName(HeadKind kind) {
  return kind == HeadKind::kClass3 ? "class3" : "cont";
}

HeadKind ParseHeadKind(std::string_view name) {
  if (name == "class3") return HeadKind::kClass3;
  if (name == "cont") return HeadKind::kCont;
  throw ConfigError("unknown head '" + std::string(name) +
                    "' (expected class3 or cont)");
}

std::string_view MdrbModeName(MdrbMode mode) {
  switch (mode) {
    case MdrbMode::kCombined: return "combined";
    case MdrbMode::kBranch1: return "branch1";
    case MdrbMode::kBranch2: return "branch2";
  }
  return "?";
}

MdrbMode ParseMdrbMode(std::string_view name) {
  if (name == "combined") return MdrbMode::kCombined;
  if (name == "branch1") return MdrbMode::kBranch1;
  if (name == "branch2") return MdrbMode::kBranch2;
  throw ConfigError("unknown MDRB mode '" + std::string(name) + "'");
}

Tensor Initializer::Weight(ad::Shape shape, std::size_t fan_in, bool relu) {
  const double limit = std::sqrt((relu ? 6.0 : 3.0) / static_cast<double>(fan_in));
  std::vector<double> v(ad::NumElements(shape));
  for (auto& e : v) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    e = (2.0 * u - 1.0) * limit;
  }
  return Tensor::FromValues(std::move(shape), std::move(v), true);
}

Tensor Initializer::Bias(std::size_t n) { return Tensor::Zeros({n}, true); }

Mdrb::Mdrb(const MdrbConfig& config, std::size_t in_channels, Initializer& init)
    : config_(config) {
  const auto& c = config_;
  if (c.h == 0 || c.w == 0 || c.d == 0 || c.filters == 0 || in_channels == 0) {
    throw ConfigError("MDRB kernel extents and filter count must be >= 1");
  }
  k1_ = init.Weight({c.h, c.w, c.d, in_channels, c.filters},
                    c.h * c.w * c.d * in_channels);
  b1_ = init.Bias(c.filters);
  k2a_ = init.Weight({1, 1, c.d, in_channels, c.filters}, c.d * in_channels);
  b2a_ = init.Bias(c.filters);
  k2b_ = init.Weight({c.h, c.w, 1, c.filters, c.filters}, c.h * c.w * c.filters);
  b2b_ = init.Bias(c.filters);
}

Tensor Mdrb::Branch1(const Tensor& x) const {
  return ad::Relu(ad::Conv3d(x, k1_, b1_));
}

Tensor Mdrb::Branch2(const Tensor& x) const {
  const Tensor spectral = ad::Relu(ad::Conv3d(x, k2a_, b2a_));
  return ad::Relu(ad::Conv3d(spectral, k2b_, b2b_));
}

Tensor Mdrb::Forward(const Tensor& x, MdrbMode mode) const {
  switch (mode) {
    case MdrbMode::kBranch1: return Branch1(x);
    case MdrbMode::kBranch2: return Branch2(x);
    case MdrbMode::kCombined: break;
  }
  const Tensor both[] = {Branch1(x), Branch2(x)};
  return ad::Mean(both);
}

void Mdrb::CollectParams(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".branch1.kernel", k1_});
  out.push_back({prefix + ".branch1.bias", b1_});
  out.push_back({prefix + ".branch2.spectral.kernel", k2a_});
  out.push_back({prefix + ".branch2.spectral.bias", b2a_});
  out.push_back({prefix + ".branch2.spatial.kernel", k2b_});
  out.push_back({prefix + ".branch2.spatial.bias", b2b_});
}

Head::Head(std::size_t in_features, HeadKind kind, Initializer& init)
    : kind_(kind) {
  const std::size_t out = kind == HeadKind::kClass3 ? 3 : 1;
  weight_ = init.Weight({in_features, out}, in_features, /*relu=*/false);
  bias_ = init.Bias(out);
}

Tensor Head::Logits(const Tensor& features) const {
  return ad::Dense(features, weight_, bias_);
}

Tensor Head::Forward(const Tensor& features) const {
  const Tensor logits = Logits(features);
  return kind_ == HeadKind::kClass3 ? ad::Softmax(logits) : ad::Sigmoid(logits);
}

void Head::CollectParams(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight_});
  out.push_back({prefix + ".bias", bias_});
}

FreqBranch::FreqBranch(std::size_t depth, std::size_t filters, HeadKind head,
                       Initializer& init, MdrbMode mode)
    : schedule_(ComputeDepthSchedule(depth)),
      mode_(mode),
      first_(MdrbConfig{3, 3, schedule_.d1, filters}, 1, init),
      second_(MdrbConfig{3, 3, schedule_.d2, filters}, filters, init),
      head_(filters, head, init) {}

Tensor FreqBranch::Features(const Tensor& block) const {
  if (block.rank() != 4 || block.dim(2) != schedule_.d_in) {
    throw ShapeError("frequency branch built for depth " +
                     std::to_string(schedule_.d_in) + " given block " +
                     ad::ShapeString(block.shape()));
  }
  const Tensor h = second_.Forward(first_.Forward(block, mode_), mode_);
  return ad::GlobalAveragePool(h);
}

Tensor FreqBranch::Forward(const Tensor& block) const {
  return head_.Forward(Features(block));
}

void FreqBranch::CollectParams(const std::string& prefix, ParamList& out) const {
  first_.CollectParams(prefix + ".mdrb1", out);
  second_.CollectParams(prefix + ".mdrb2", out);
  head_.CollectParams(prefix + ".head", out);
}

std::size_t TcnConfig::ReceptiveField() const {
  const std::size_t sum = std::accumulate(dilations.begin(), dilations.end(),
                                          std::size_t{0});
  return 1 + kConvsPerBlock * (kernel - 1) * stacks * sum;
}

void TcnConfig::Validate() const {
  if (kernel == 0 || filters == 0 || stacks == 0 || dilations.empty()) {
    throw ConfigError("TCN kernel, filters, stacks and dilations must be non-empty");
  }
  for (auto d : dilations) {
    if (d == 0) throw ConfigError("TCN dilations must be >= 1");
  }
}

TcnBranch::TcnBranch(const TcnConfig& config, std::size_t in_channels,
                     HeadKind head, Initializer& init)
    : config_((config.Validate(), config)),
      head_([&]() -> Head {
        // Convolution weights are drawn before the head so the draw order
        // follows the forward order.
        std::size_t channels = in_channels;
        for (std::size_t s = 0; s < config_.stacks; ++s) {
          for (auto dilation : config_.dilations) {
            Block b;
            b.dilation = dilation;
            const std::size_t F = config_.filters, k = config_.kernel;
            b.k1 = init.Weight({k, channels, F}, k * channels);
            b.b1 = init.Bias(F);
            b.k2 = init.Weight({k, F, F}, k * F);
            b.b2 = init.Bias(F);
            if (channels != F) {
              b.proj_k = init.Weight({1, channels, F}, channels, /*relu=*/false);
              b.proj_b = init.Bias(F);
            }
            blocks_.push_back(std::move(b));
            channels = F;
          }
        }
        return Head(config_.filters, head, init);
      }()) {}

Tensor TcnBranch::Sequence(const Tensor& window) const {
  Tensor x = window;
  for (const auto& b : blocks_) {
    Tensor h = ad::Relu(ad::Conv1dCausal(x, b.k1, b.b1, b.dilation));
    h = ad::Relu(ad::Conv1dCausal(h, b.k2, b.b2, b.dilation));
    const Tensor skip = b.proj_k.defined()
                            ? ad::Conv1dCausal(x, b.proj_k, b.proj_b, 1)
                            : x;
    x = ad::Relu(ad::Add(h, skip));
  }
  return x;
}

Tensor TcnBranch::Features(const Tensor& window) const {
  return ad::LastStep(Sequence(window));
}

Tensor TcnBranch::Forward(const Tensor& window) const {
  return head_.Forward(Features(window));
}

void TcnBranch::CollectParams(const std::string& prefix, ParamList& out) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    const std::string p = prefix + ".block" + std::to_string(i);
    out.push_back({p + ".conv1.kernel", b.k1});
    out.push_back({p + ".conv1.bias", b.b1});
    out.push_back({p + ".conv2.kernel", b.k2});
    out.push_back({p + ".conv2.bias", b.b2});
    if (b.proj_k.defined()) {
      out.push_back({p + ".skip.kernel", b.proj_k});
      out.push_back({p + ".skip.bias", b.proj_b});
    }
  }
  head_.CollectParams(prefix + ".head", out);
}

}  // namespace mwl
