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

#include "mwl/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mwl/error.hpp"

namespace mwl::ad {

namespace {

void Expect(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

std::vector<Tensor> Parents(std::initializer_list<Tensor> ts) {
  std::vector<Tensor> out;
  for (const auto& t : ts) {
    if (t.defined()) out.push_back(t);
  }
  return out;
}

// Elementwise op where d out / d in depends only on (in, out).
template <typename Fwd, typename Deriv>
Tensor Unary(const char* name, const Tensor& x, Fwd fwd, Deriv deriv) {
  std::vector<double> out(x.numel());
  const auto in = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(in[i]);
  return Tensor::MakeResult(
      name, x.shape(), out, {x},
      [deriv, out](std::span<const double> g, std::vector<Tensor>& p) {
        const auto xin = p[0].values();
        auto gx = p[0].grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
          gx[i] += g[i] * deriv(xin[i], out[i]);
        }
      });
}

}  // namespace

Tensor Conv3d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              Padding spatial) {
  Expect(input.rank() == 4, "conv3d input must be [H,W,D,C], got " +
                                ShapeString(input.shape()));
  Expect(kernel.rank() == 5, "conv3d kernel must be [kh,kw,kd,Cin,Cout], got " +
                                 ShapeString(kernel.shape()));
  const std::size_t H = input.dim(0), W = input.dim(1), D = input.dim(2),
                    Ci = input.dim(3);
  const std::size_t kh = kernel.dim(0), kw = kernel.dim(1), kd = kernel.dim(2),
                    Co = kernel.dim(4);
  Expect(kernel.dim(3) == Ci, "conv3d channel mismatch: input " +
                                  ShapeString(input.shape()) + ", kernel " +
                                  ShapeString(kernel.shape()));
  Expect(kd >= 1 && kd <= D, "conv3d kernel depth " + std::to_string(kd) +
                                 " exceeds input depth " + std::to_string(D));
  Expect(kh >= 1 && kw >= 1 && Co >= 1, "conv3d kernel has an empty axis");
  if (bias.defined()) {
    Expect(bias.numel() == Co, "conv3d bias must have Cout elements");
  }

  std::size_t ph = 0, pw = 0, Ho = H, Wo = W;
  if (spatial == Padding::kSame) {
    ph = (kh - 1) / 2;
    pw = (kw - 1) / 2;
  } else {
    Expect(kh <= H && kw <= W, "conv3d valid kernel larger than input");
    Ho = H - kh + 1;
    Wo = W - kw + 1;
  }
  const std::size_t Do = D - kd + 1;
  const std::size_t chunk = kd * Ci;  // contiguous (depth, channel) span

  const auto x = input.values();
  const auto k = kernel.values();
  std::vector<double> out(Ho * Wo * Do * Co, 0.0);

  // Visits every (output cell, kernel tap) pair with valid input coordinates.
  auto for_each_tap = [=](auto&& body) {
    for (std::size_t oh = 0; oh < Ho; ++oh) {
      for (std::size_t ow = 0; ow < Wo; ++ow) {
        for (std::size_t i = 0; i < kh; ++i) {
          const long ih = static_cast<long>(oh + i) - static_cast<long>(ph);
          if (ih < 0 || ih >= static_cast<long>(H)) continue;
          for (std::size_t j = 0; j < kw; ++j) {
            const long iw = static_cast<long>(ow + j) - static_cast<long>(pw);
            if (iw < 0 || iw >= static_cast<long>(W)) continue;
            const std::size_t kbase = (i * kw + j) * chunk * Co;
            for (std::size_t od = 0; od < Do; ++od) {
              const std::size_t xbase =
                  ((static_cast<std::size_t>(ih) * W + static_cast<std::size_t>(iw)) * D + od) * Ci;
              const std::size_t obase = ((oh * Wo + ow) * Do + od) * Co;
              body(xbase, kbase, obase);
            }
          }
        }
      }
    }
  };

  for_each_tap([&](std::size_t xb, std::size_t kb, std::size_t ob) {
    double* o = out.data() + ob;
    for (std::size_t m = 0; m < chunk; ++m) {
      const double xv = x[xb + m];
      if (xv == 0.0) continue;
      const double* kr = k.data() + kb + m * Co;
      for (std::size_t co = 0; co < Co; ++co) o[co] += xv * kr[co];
    }
  });
  if (bias.defined()) {
    const auto b = bias.values();
    for (std::size_t o = 0; o < out.size(); o += Co) {
      for (std::size_t co = 0; co < Co; ++co) out[o + co] += b[co];
    }
  }

  return Tensor::MakeResult(
      "conv3d", {Ho, Wo, Do, Co}, std::move(out), Parents({input, kernel, bias}),
      [=](std::span<const double> g, std::vector<Tensor>& p) {
        Tensor in_t = p[0], ker_t = p[1];
        const bool want_x = in_t.requires_grad();
        const bool want_k = ker_t.requires_grad();
        const auto xv = in_t.values();
        const auto kv = ker_t.values();
        std::span<double> gx, gk;
        if (want_x) gx = in_t.grad_buffer();
        if (want_k) gk = ker_t.grad_buffer();
        if (want_x || want_k) {
          for_each_tap([&](std::size_t xb, std::size_t kb, std::size_t ob) {
            const double* go = g.data() + ob;
            for (std::size_t m = 0; m < chunk; ++m) {
              const double* kr = kv.data() + kb + m * Co;
              if (want_x) {
                double acc = 0.0;
                for (std::size_t co = 0; co < Co; ++co) acc += go[co] * kr[co];
                gx[xb + m] += acc;
              }
              if (want_k) {
                const double xval = xv[xb + m];
                if (xval == 0.0) continue;
                double* gkr = gk.data() + kb + m * Co;
                for (std::size_t co = 0; co < Co; ++co) gkr[co] += xval * go[co];
              }
            }
          });
        }
        if (p.size() > 2 && p[2].requires_grad()) {
          auto gb = p[2].grad_buffer();
          for (std::size_t o = 0; o < g.size(); o += Co) {
            for (std::size_t co = 0; co < Co; ++co) gb[co] += g[o + co];
          }
        }
      });
}

Tensor Conv1dCausal(const Tensor& input, const Tensor& kernel,
                    const Tensor& bias, std::size_t dilation) {
  Expect(input.rank() == 2, "conv1d input must be [T,C], got " +
                                ShapeString(input.shape()));
  Expect(kernel.rank() == 3, "conv1d kernel must be [k,Cin,Cout], got " +
                                 ShapeString(kernel.shape()));
  Expect(dilation >= 1, "conv1d dilation must be >= 1");
  const std::size_t T = input.dim(0), Ci = input.dim(1);
  const std::size_t K = kernel.dim(0), Co = kernel.dim(2);
  Expect(K >= 1, "conv1d kernel size must be >= 1");
  Expect(kernel.dim(1) == Ci, "conv1d channel mismatch: input " +
                                  ShapeString(input.shape()) + ", kernel " +
                                  ShapeString(kernel.shape()));
  if (bias.defined()) {
    Expect(bias.numel() == Co, "conv1d bias must have Cout elements");
  }

  const auto x = input.values();
  const auto k = kernel.values();
  std::vector<double> out(T * Co, 0.0);
  if (bias.defined()) {
    const auto b = bias.values();
    for (std::size_t t = 0; t < T; ++t) {
      std::copy(b.begin(), b.end(), out.begin() + t * Co);
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    double* o = out.data() + t * Co;
    for (std::size_t j = 0; j < K; ++j) {
      const std::size_t back = (K - 1 - j) * dilation;
      if (back > t) continue;
      const double* xr = x.data() + (t - back) * Ci;
      const double* kj = k.data() + j * Ci * Co;
      for (std::size_t ci = 0; ci < Ci; ++ci) {
        const double xv = xr[ci];
        const double* kr = kj + ci * Co;
        for (std::size_t co = 0; co < Co; ++co) o[co] += xv * kr[co];
      }
    }
  }

  return Tensor::MakeResult(
      "conv1d_causal", {T, Co}, std::move(out), Parents({input, kernel, bias}),
      [=](std::span<const double> g, std::vector<Tensor>& p) {
        Tensor in_t = p[0], ker_t = p[1];
        const bool want_x = in_t.requires_grad();
        const bool want_k = ker_t.requires_grad();
        const auto xv = in_t.values();
        const auto kv = ker_t.values();
        std::span<double> gx, gk;
        if (want_x) gx = in_t.grad_buffer();
        if (want_k) gk = ker_t.grad_buffer();
        for (std::size_t t = 0; t < T; ++t) {
          const double* go = g.data() + t * Co;
          for (std::size_t j = 0; j < K; ++j) {
            const std::size_t back = (K - 1 - j) * dilation;
            if (back > t) continue;
            const std::size_t xrow = (t - back) * Ci;
            for (std::size_t ci = 0; ci < Ci; ++ci) {
              const std::size_t kr = (j * Ci + ci) * Co;
              if (want_x) {
                double acc = 0.0;
                for (std::size_t co = 0; co < Co; ++co) acc += go[co] * kv[kr + co];
                gx[xrow + ci] += acc;
              }
              if (want_k) {
                const double xval = xv[xrow + ci];
                for (std::size_t co = 0; co < Co; ++co) gk[kr + co] += xval * go[co];
              }
            }
          }
        }
        if (p.size() > 2 && p[2].requires_grad()) {
          auto gb = p[2].grad_buffer();
          for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t co = 0; co < Co; ++co) gb[co] += g[t * Co + co];
          }
        }
      });
}

Tensor Dense(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  Expect(weight.rank() == 2 && weight.dim(0) == x.numel(),
         "dense weight " + ShapeString(weight.shape()) + " does not match input " +
             ShapeString(x.shape()));
  const std::size_t n = weight.dim(0), m = weight.dim(1);
  if (bias.defined()) Expect(bias.numel() == m, "dense bias must have m elements");
  const auto xv = x.values();
  const auto w = weight.values();
  std::vector<double> out(m, 0.0);
  if (bias.defined()) std::copy(bias.values().begin(), bias.values().end(), out.begin());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[j] += xv[i] * w[i * m + j];
  }
  return Tensor::MakeResult(
      "dense", {m}, std::move(out), Parents({x, weight, bias}),
      [n, m](std::span<const double> g, std::vector<Tensor>& p) {
        const auto xv = p[0].values();
        const auto w = p[1].values();
        if (p[0].requires_grad()) {
          auto gx = p[0].grad_buffer();
          for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += g[j] * w[i * m + j];
            gx[i] += acc;
          }
        }
        if (p[1].requires_grad()) {
          auto gw = p[1].grad_buffer();
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) gw[i * m + j] += xv[i] * g[j];
          }
        }
        if (p.size() > 2 && p[2].requires_grad()) {
          auto gb = p[2].grad_buffer();
          for (std::size_t j = 0; j < m; ++j) gb[j] += g[j];
        }
      });
}

Tensor Relu(const Tensor& x) {
  return Unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Tensor Sigmoid(const Tensor& x) {
  return Unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double out) { return out * (1.0 - out); });
}

Tensor Softmax(const Tensor& x) {
  Expect(x.rank() >= 1, "softmax on a rank-0 tensor");
  const std::size_t C = x.shape().back();
  const std::size_t rows = x.numel() / C;
  const auto in = x.values();
  std::vector<double> out(x.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in.data() + r * C;
    double* yr = out.data() + r * C;
    const double mx = *std::max_element(xr, xr + C);
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      yr[c] = std::exp(xr[c] - mx);
      sum += yr[c];
    }
    for (std::size_t c = 0; c < C; ++c) yr[c] /= sum;
  }
  return Tensor::MakeResult(
      "softmax", x.shape(), out, {x},
      [out, C, rows](std::span<const double> g, std::vector<Tensor>& p) {
        auto gx = p[0].grad_buffer();
        for (std::size_t r = 0; r < rows; ++r) {
          const double* y = out.data() + r * C;
          const double* gy = g.data() + r * C;
          double dot = 0.0;
          for (std::size_t c = 0; c < C; ++c) dot += gy[c] * y[c];
          for (std::size_t c = 0; c < C; ++c) gx[r * C + c] += y[c] * (gy[c] - dot);
        }
      });
}

Tensor GlobalAveragePool(const Tensor& x) {
  Expect(x.rank() >= 2, "global average pool needs a channel axis");
  const std::size_t C = x.shape().back();
  const std::size_t positions = x.numel() / C;
  Expect(positions > 0, "global average pool over an empty tensor");
  const auto in = x.values();
  std::vector<double> out(C, 0.0);
  for (std::size_t i = 0; i < positions; ++i) {
    for (std::size_t c = 0; c < C; ++c) out[c] += in[i * C + c];
  }
  const double inv = 1.0 / static_cast<double>(positions);
  for (auto& v : out) v *= inv;
  return Tensor::MakeResult(
      "global_average_pool", {C}, std::move(out), {x},
      [C, positions, inv](std::span<const double> g, std::vector<Tensor>& p) {
        auto gx = p[0].grad_buffer();
        for (std::size_t i = 0; i < positions; ++i) {
          for (std::size_t c = 0; c < C; ++c) gx[i * C + c] += g[c] * inv;
        }
      });
}

Tensor Mean(std::span<const Tensor> xs) {
  Expect(!xs.empty(), "mean of zero tensors");
  const Shape& shape = xs[0].shape();
  for (const auto& t : xs) {
    Expect(t.shape() == shape, "mean over mismatched shapes " +
                                   ShapeString(shape) + " and " +
                                   ShapeString(t.shape()));
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  std::vector<double> out(xs[0].numel(), 0.0);
  for (const auto& t : xs) {
    const auto v = t.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  for (auto& v : out) v *= inv;
  return Tensor::MakeResult(
      "mean", shape, std::move(out), std::vector<Tensor>(xs.begin(), xs.end()),
      [inv](std::span<const double> g, std::vector<Tensor>& p) {
        for (auto& t : p) {
          if (!t.requires_grad()) continue;
          auto gt = t.grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i] * inv;
        }
      });
}

Tensor MeanAll(const Tensor& x) {
  const auto v = x.values();
  double sum = 0.0;
  for (double e : v) sum += e;
  const double inv = 1.0 / static_cast<double>(v.size());
  return Tensor::MakeResult(
      "mean_all", {1}, {sum * inv}, {x},
      [inv](std::span<const double> g, std::vector<Tensor>& p) {
        auto gx = p[0].grad_buffer();
        for (auto& e : gx) e += g[0] * inv;
      });
}

Tensor Add(const Tensor& a, const Tensor& b) {
  Expect(a.shape() == b.shape(), "add over mismatched shapes " +
                                     ShapeString(a.shape()) + " and " +
                                     ShapeString(b.shape()));
  std::vector<double> out(a.numel());
  const auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return Tensor::MakeResult(
      "add", a.shape(), std::move(out), {a, b},
      [](std::span<const double> g, std::vector<Tensor>& p) {
        for (auto& t : p) {
          if (!t.requires_grad()) continue;
          auto gt = t.grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
        }
      });
}

Tensor Scale(const Tensor& x, double factor) {
  std::vector<double> out(x.numel());
  const auto v = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] * factor;
  return Tensor::MakeResult(
      "scale", x.shape(), std::move(out), {x},
      [factor](std::span<const double> g, std::vector<Tensor>& p) {
        auto gx = p[0].grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
      });
}

Tensor LastStep(const Tensor& x) {
  Expect(x.rank() == 2 && x.dim(0) >= 1, "last_step needs [T,C] with T >= 1");
  const std::size_t T = x.dim(0), C = x.dim(1);
  const auto v = x.values();
  std::vector<double> out(v.begin() + (T - 1) * C, v.end());
  return Tensor::MakeResult(
      "last_step", {C}, std::move(out), {x},
      [T, C](std::span<const double> g, std::vector<Tensor>& p) {
        auto gx = p[0].grad_buffer();
        for (std::size_t c = 0; c < C; ++c) gx[(T - 1) * C + c] += g[c];
      });
}

Tensor Stack(std::span<const Tensor> xs) {
  Expect(!xs.empty(), "stack of zero tensors");
  const Shape& inner = xs[0].shape();
  Shape shape{xs.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  const std::size_t n = xs[0].numel();
  std::vector<double> out;
  out.reserve(xs.size() * n);
  for (const auto& t : xs) {
    Expect(t.shape() == inner, "stack over mismatched shapes");
    out.insert(out.end(), t.values().begin(), t.values().end());
  }
  return Tensor::MakeResult(
      "stack", std::move(shape), std::move(out),
      std::vector<Tensor>(xs.begin(), xs.end()),
      [n](std::span<const double> g, std::vector<Tensor>& p) {
        for (std::size_t r = 0; r < p.size(); ++r) {
          if (!p[r].requires_grad()) continue;
          auto gt = p[r].grad_buffer();
          for (std::size_t i = 0; i < n; ++i) gt[i] += g[r * n + i];
        }
      });
}

Tensor CrossEntropy(const Tensor& pred, const Tensor& onehot) {
  Expect(pred.rank() == 2 && pred.shape() == onehot.shape(),
         "cross entropy expects matching [N,C] tensors, got " +
             ShapeString(pred.shape()) + " and " + ShapeString(onehot.shape()));
  constexpr double kFloor = 1e-12;
  const std::size_t N = pred.dim(0), C = pred.dim(1);
  const auto y = onehot.values();
  for (std::size_t r = 0; r < N; ++r) {
    int ones = 0;
    for (std::size_t c = 0; c < C; ++c) {
      const double v = y[r * C + c];
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        ones = -1;
        break;
      }
    }
    if (ones != 1) {
      throw ValidationError("target row " + std::to_string(r) + " is not one-hot");
    }
  }
  const auto p = pred.values();
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (y[i] != 0.0) loss -= y[i] * std::log(std::clamp(p[i], kFloor, 1.0));
  }
  const double invN = 1.0 / static_cast<double>(N);
  return Tensor::MakeResult(
      "cross_entropy", {1}, {loss * invN}, {pred, onehot},
      [invN](std::span<const double> g, std::vector<Tensor>& parents) {
        if (!parents[0].requires_grad()) return;
        const auto pv = parents[0].values();
        const auto yv = parents[1].values();
        auto gp = parents[0].grad_buffer();
        for (std::size_t i = 0; i < pv.size(); ++i) {
          if (yv[i] == 0.0 || pv[i] < kFloor || pv[i] > 1.0) continue;
          gp[i] -= g[0] * invN * yv[i] / pv[i];
        }
      });
}

Tensor Mse(const Tensor& pred, const Tensor& target) {
  Expect(pred.numel() == target.numel() && pred.numel() > 0,
         "mse length mismatch: " + ShapeString(pred.shape()) + " vs " +
             ShapeString(target.shape()));
  const auto a = pred.values(), b = target.values();
  const double invN = 1.0 / static_cast<double>(a.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return Tensor::MakeResult(
      "mse", {1}, {sum * invN}, {pred, target},
      [invN](std::span<const double> g, std::vector<Tensor>& p) {
        const auto av = p[0].values(), bv = p[1].values();
        for (int side = 0; side < 2; ++side) {
          if (!p[side].requires_grad()) continue;
          auto gs = p[side].grad_buffer();
          const double sign = side == 0 ? 1.0 : -1.0;
          for (std::size_t i = 0; i < av.size(); ++i) {
            gs[i] += sign * g[0] * 2.0 * (av[i] - bv[i]) * invN;
          }
        }
      });
}

}  // namespace mwl::ad
