// tensor.hpp : minimal deterministic NCHW tensor engine — forward and
// backward kernels for conv/attention layers, L1 loss, Adam
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "anysr/common.hpp"

namespace anysr {

// Batch of feature maps, row-major within channel, channel-major within item.
template <typename T>
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_, T fill = T(0))
      : n(n_), c(c_), h(h_), w(w_),
        data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {
    if (n_ < 1 || c_ < 1 || h_ < 1 || w_ < 1)
      throw InvalidArgument("Tensor4: dimensions must be positive");
  }

  std::size_t elems() const { return data.size(); }

  T& at(int in, int ic, int iy, int ix) {
    return data[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
  }
  T at(int in, int ic, int iy, int ix) const {
    return data[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
  }

  T* plane(int in, int ic) {
    return data.data() + (static_cast<std::size_t>(in) * c + ic) * h * w;
  }
  const T* plane(int in, int ic) const {
    return data.data() + (static_cast<std::size_t>(in) * c + ic) * h * w;
  }

  bool same_shape(const Tensor4& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  static Tensor4 zeros_like(const Tensor4& o) { return Tensor4(o.n, o.c, o.h, o.w); }
};

using Tensor4f = Tensor4<float>;

// Trainable tensor with gradient and Adam moment buffers, all shape-locked.
template <typename T>
struct Parameter {
  std::string name;
  Tensor4<T> value, grad, m, v;

  Parameter() = default;
  Parameter(std::string name_, Tensor4<T> init)
      : name(std::move(name_)), value(std::move(init)),
        grad(Tensor4<T>::zeros_like(value)), m(Tensor4<T>::zeros_like(value)),
        v(Tensor4<T>::zeros_like(value)) {}

  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), T(0)); }
};

struct OptimizerConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

namespace nn {

// Cross-correlation (deep-learning "convolution"), kernels 1x1 or 3x3.
// same_pad zero-pads so spatial dims are preserved; otherwise output shrinks
// by k-1. Weights are (cout, cin, k, k); bias is (1, cout, 1, 1) or empty.
template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& x, const Tensor4<T>& w, const Tensor4<T>& b,
                          bool same_pad) {
  const int k = w.h;
  if (w.w != k || (k != 1 && k != 3))
    throw InvalidArgument("conv2d: kernel must be 1x1 or 3x3");
  if (w.c != x.c) throw InvalidArgument("conv2d: channel mismatch");
  if (b.data.size() && (b.c != w.n || b.n != 1 || b.h != 1 || b.w != 1))
    throw InvalidArgument("conv2d: bad bias shape");
  const int pad = same_pad ? (k - 1) / 2 : 0;
  const int oh = x.h + 2 * pad - k + 1;
  const int ow = x.w + 2 * pad - k + 1;
  if (oh < 1 || ow < 1) throw InvalidArgument("conv2d: output would be empty");

  Tensor4<T> y(x.n, w.n, oh, ow);
  for (int in = 0; in < x.n; ++in)
    for (int co = 0; co < w.n; ++co) {
      T* out = y.plane(in, co);
      if (b.data.size()) {
        const T bias = b.data[co];
        for (int i = 0; i < oh * ow; ++i) out[i] = bias;
      }
      for (int ci = 0; ci < x.c; ++ci) {
        const T* src = x.plane(in, ci);
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx) {
            const T wv = w.at(co, ci, ky, kx);
            if (wv == T(0)) continue;
            const int dy = ky - pad, dx = kx - pad;
            const int y0 = std::max(0, -dy), y1 = std::min(oh, x.h - dy);
            const int x0 = std::max(0, -dx), x1 = std::min(ow, x.w - dx);
            for (int oy = y0; oy < y1; ++oy) {
              T* orow = out + static_cast<std::size_t>(oy) * ow;
              const T* irow = src + static_cast<std::size_t>(oy + dy) * x.w + dx;
              for (int ox = x0; ox < x1; ++ox) orow[ox] += wv * irow[ox];
            }
          }
      }
    }
  return y;
}

// Exact gradients of conv2d_forward. grad_w/grad_b accumulate (+=) so shared
// parameters can gather contributions; grad_x is written from scratch.
template <typename T>
void conv2d_backward(const Tensor4<T>& x, const Tensor4<T>& w, const Tensor4<T>& gy,
                     bool same_pad, Tensor4<T>* grad_x, Tensor4<T>* grad_w,
                     Tensor4<T>* grad_b) {
  const int k = w.h;
  const int pad = same_pad ? (k - 1) / 2 : 0;
  const int oh = gy.h, ow = gy.w;
  if (gy.c != w.n || gy.n != x.n) throw InvalidArgument("conv2d_backward: shape mismatch");
  if (oh != x.h + 2 * pad - k + 1 || ow != x.w + 2 * pad - k + 1)
    throw InvalidArgument("conv2d_backward: grad_out dims inconsistent with forward");

  if (grad_b) {
    for (int co = 0; co < w.n; ++co) {
      T acc = T(0);
      for (int in = 0; in < x.n; ++in) {
        const T* g = gy.plane(in, co);
        for (int i = 0; i < oh * ow; ++i) acc += g[i];
      }
      grad_b->data[co] += acc;
    }
  }

  if (grad_w) {
    for (int in = 0; in < x.n; ++in)
      for (int co = 0; co < w.n; ++co) {
        const T* g = gy.plane(in, co);
        for (int ci = 0; ci < x.c; ++ci) {
          const T* src = x.plane(in, ci);
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const int dy = ky - pad, dx = kx - pad;
              const int y0 = std::max(0, -dy), y1 = std::min(oh, x.h - dy);
              const int x0 = std::max(0, -dx), x1 = std::min(ow, x.w - dx);
              T acc = T(0);
              for (int oy = y0; oy < y1; ++oy) {
                const T* grow = g + static_cast<std::size_t>(oy) * ow;
                const T* irow = src + static_cast<std::size_t>(oy + dy) * x.w + dx;
                for (int ox = x0; ox < x1; ++ox) acc += grow[ox] * irow[ox];
              }
              grad_w->at(co, ci, ky, kx) += acc;
            }
        }
      }
  }

  if (grad_x) {
    *grad_x = Tensor4<T>::zeros_like(x);
    for (int in = 0; in < x.n; ++in)
      for (int co = 0; co < w.n; ++co) {
        const T* g = gy.plane(in, co);
        for (int ci = 0; ci < x.c; ++ci) {
          T* dst = grad_x->plane(in, ci);
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const T wv = w.at(co, ci, ky, kx);
              if (wv == T(0)) continue;
              const int dy = ky - pad, dx = kx - pad;
              const int y0 = std::max(0, -dy), y1 = std::min(oh, x.h - dy);
              const int x0 = std::max(0, -dx), x1 = std::min(ow, x.w - dx);
              for (int oy = y0; oy < y1; ++oy) {
                const T* grow = g + static_cast<std::size_t>(oy) * ow;
                T* drow = dst + static_cast<std::size_t>(oy + dy) * x.w + dx;
                for (int ox = x0; ox < x1; ++ox) drow[ox] += wv * grow[ox];
              }
            }
        }
      }
  }
}

template <typename T>
Tensor4<T> relu_forward(const Tensor4<T>& x) {
  Tensor4<T> y = x;
  for (T& v : y.data) v = v > T(0) ? v : T(0);
  return y;
}

template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& x, const Tensor4<T>& gy) {
  if (!x.same_shape(gy)) throw InvalidArgument("relu_backward: shape mismatch");
  Tensor4<T> gx = gy;
  for (std::size_t i = 0; i < gx.data.size(); ++i)
    if (x.data[i] <= T(0)) gx.data[i] = T(0);
  return gx;
}

template <typename T>
Tensor4<T> sigmoid_forward(const Tensor4<T>& x) {
  Tensor4<T> y = x;
  for (T& v : y.data) v = T(1) / (T(1) + std::exp(-v));
  return y;
}

// Takes the forward output y: d sigmoid = y (1 - y).
template <typename T>
Tensor4<T> sigmoid_backward(const Tensor4<T>& y, const Tensor4<T>& gy) {
  if (!y.same_shape(gy)) throw InvalidArgument("sigmoid_backward: shape mismatch");
  Tensor4<T> gx = gy;
  for (std::size_t i = 0; i < gx.data.size(); ++i)
    gx.data[i] *= y.data[i] * (T(1) - y.data[i]);
  return gx;
}

template <typename T>
Tensor4<T> add(const Tensor4<T>& a, const Tensor4<T>& b) {
  if (!a.same_shape(b)) throw InvalidArgument("add: shape mismatch");
  Tensor4<T> y = a;
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += b.data[i];
  return y;
}

enum class MulKind { kSameShape, kChannelGate, kSpatialGate };

template <typename T>
MulKind mul_kind(const Tensor4<T>& x, const Tensor4<T>& g) {
  if (x.same_shape(g)) return MulKind::kSameShape;
  if (g.n == x.n && g.c == x.c && g.h == 1 && g.w == 1) return MulKind::kChannelGate;
  if (g.n == x.n && g.c == 1 && g.h == x.h && g.w == x.w) return MulKind::kSpatialGate;
  throw InvalidArgument("mul: incompatible shapes");
}

// Elementwise product; the gate may also be a per-channel (n,c,1,1) or a
// single-channel spatial (n,1,h,w) map, broadcast accordingly.
template <typename T>
Tensor4<T> mul(const Tensor4<T>& x, const Tensor4<T>& g) {
  Tensor4<T> y = x;
  switch (mul_kind(x, g)) {
    case MulKind::kSameShape:
      for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] *= g.data[i];
      break;
    case MulKind::kChannelGate:
      for (int in = 0; in < x.n; ++in)
        for (int ic = 0; ic < x.c; ++ic) {
          const T s = g.at(in, ic, 0, 0);
          T* p = y.plane(in, ic);
          for (int i = 0; i < x.h * x.w; ++i) p[i] *= s;
        }
      break;
    case MulKind::kSpatialGate:
      for (int in = 0; in < x.n; ++in)
        for (int ic = 0; ic < x.c; ++ic) {
          const T* s = g.plane(in, 0);
          T* p = y.plane(in, ic);
          for (int i = 0; i < x.h * x.w; ++i) p[i] *= s[i];
        }
      break;
  }
  return y;
}

// Gradients of mul for both factors; broadcast dimensions reduce by sum.
template <typename T>
void mul_backward(const Tensor4<T>& x, const Tensor4<T>& g, const Tensor4<T>& gy,
                  Tensor4<T>* grad_x, Tensor4<T>* grad_g) {
  const MulKind kind = mul_kind(x, g);
  if (grad_x) *grad_x = mul(gy, g);
  if (!grad_g) return;
  *grad_g = Tensor4<T>::zeros_like(g);
  switch (kind) {
    case MulKind::kSameShape:
      for (std::size_t i = 0; i < g.data.size(); ++i)
        grad_g->data[i] = gy.data[i] * x.data[i];
      break;
    case MulKind::kChannelGate:
      for (int in = 0; in < x.n; ++in)
        for (int ic = 0; ic < x.c; ++ic) {
          const T* gp = gy.plane(in, ic);
          const T* xp = x.plane(in, ic);
          T acc = T(0);
          for (int i = 0; i < x.h * x.w; ++i) acc += gp[i] * xp[i];
          grad_g->at(in, ic, 0, 0) = acc;
        }
      break;
    case MulKind::kSpatialGate:
      for (int in = 0; in < x.n; ++in) {
        T* dst = grad_g->plane(in, 0);
        for (int ic = 0; ic < x.c; ++ic) {
          const T* gp = gy.plane(in, ic);
          const T* xp = x.plane(in, ic);
          for (int i = 0; i < x.h * x.w; ++i) dst[i] += gp[i] * xp[i];
        }
      }
      break;
  }
}

template <typename T>
Tensor4<T> concat_channels(const std::vector<const Tensor4<T>*>& xs) {
  if (xs.empty()) throw InvalidArgument("concat_channels: empty input list");
  int total_c = 0;
  for (const auto* t : xs) {
    if (t->n != xs[0]->n || t->h != xs[0]->h || t->w != xs[0]->w)
      throw InvalidArgument("concat_channels: spatial/batch mismatch");
    total_c += t->c;
  }
  Tensor4<T> y(xs[0]->n, total_c, xs[0]->h, xs[0]->w);
  for (int in = 0; in < y.n; ++in) {
    int co = 0;
    for (const auto* t : xs)
      for (int ic = 0; ic < t->c; ++ic, ++co) {
        const T* src = t->plane(in, ic);
        std::copy(src, src + static_cast<std::size_t>(y.h) * y.w, y.plane(in, co));
      }
  }
  return y;
}

// Inverse of concat_channels: slices gy back into per-input gradients.
template <typename T>
std::vector<Tensor4<T>> split_channels(const Tensor4<T>& gy, const std::vector<int>& sizes) {
  int total = 0;
  for (int c : sizes) total += c;
  if (total != gy.c) throw InvalidArgument("split_channels: sizes do not sum to channels");
  std::vector<Tensor4<T>> out;
  out.reserve(sizes.size());
  int at = 0;
  for (int c : sizes) {
    Tensor4<T> part(gy.n, c, gy.h, gy.w);
    for (int in = 0; in < gy.n; ++in)
      for (int ic = 0; ic < c; ++ic) {
        const T* src = gy.plane(in, at + ic);
        std::copy(src, src + static_cast<std::size_t>(gy.h) * gy.w, part.plane(in, ic));
      }
    out.push_back(std::move(part));
    at += c;
  }
  return out;
}

template <typename T>
Tensor4<T> global_avg_pool(const Tensor4<T>& x) {
  Tensor4<T> y(x.n, x.c, 1, 1);
  const T inv = T(1) / static_cast<T>(x.h * x.w);
  for (int in = 0; in < x.n; ++in)
    for (int ic = 0; ic < x.c; ++ic) {
      const T* p = x.plane(in, ic);
      T acc = T(0);
      for (int i = 0; i < x.h * x.w; ++i) acc += p[i];
      y.at(in, ic, 0, 0) = acc * inv;
    }
  return y;
}

template <typename T>
Tensor4<T> global_avg_pool_backward(const Tensor4<T>& x_shape, const Tensor4<T>& gy) {
  Tensor4<T> gx = Tensor4<T>::zeros_like(x_shape);
  const T inv = T(1) / static_cast<T>(x_shape.h * x_shape.w);
  for (int in = 0; in < gx.n; ++in)
    for (int ic = 0; ic < gx.c; ++ic) {
      const T v = gy.at(in, ic, 0, 0) * inv;
      T* p = gx.plane(in, ic);
      for (int i = 0; i < gx.h * gx.w; ++i) p[i] = v;
    }
  return gx;
}

// Mean absolute error; the loss value is reduced in double regardless of T.
// Gradient is sign(pred - target)/count with sign(0) = 0.
template <typename T>
std::pair<double, Tensor4<T>> l1_loss(const Tensor4<T>& pred, const Tensor4<T>& target) {
  if (!pred.same_shape(target)) throw InvalidArgument("l1_loss: shape mismatch");
  Tensor4<T> grad = Tensor4<T>::zeros_like(pred);
  const T inv = T(1) / static_cast<T>(pred.elems());
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const T d = pred.data[i] - target.data[i];
    acc += std::fabs(static_cast<double>(d));
    grad.data[i] = d > T(0) ? inv : (d < T(0) ? -inv : T(0));
  }
  return {acc / static_cast<double>(pred.elems()), std::move(grad)};
}

// Standard bias-corrected Adam; zeroes gradients afterwards. t is the
// 1-based step index.
template <typename T>
void adam_step(std::vector<Parameter<T>*>& params, const OptimizerConfig& cfg, long t) {
  if (t < 1) throw InvalidArgument("adam_step: step index must be >= 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (Parameter<T>* p : params) {
    for (std::size_t i = 0; i < p->value.data.size(); ++i) {
      const double g = static_cast<double>(p->grad.data[i]);
      const double m = cfg.beta1 * static_cast<double>(p->m.data[i]) + (1.0 - cfg.beta1) * g;
      const double v = cfg.beta2 * static_cast<double>(p->v.data[i]) + (1.0 - cfg.beta2) * g * g;
      p->m.data[i] = static_cast<T>(m);
      p->v.data[i] = static_cast<T>(v);
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      p->value.data[i] -= static_cast<T>(cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon));
    }
    p->zero_grad();
  }
}

// He-uniform fan-in fill for conv weights.
template <typename T>
void he_uniform_fill(Tensor4<T>& w, int fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (T& v : w.data) v = static_cast<T>(rng.uniform(-limit, limit));
}

}  // namespace nn
}  // namespace anysr
