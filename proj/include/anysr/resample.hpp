// resample.hpp : arbitrary-factor separable bicubic resizing (a = -0.5),
// antialiased on downscale, clamp-to-edge borders, renormalized taps
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
#include <utility>
#include <vector>

#include "anysr/common.hpp"
#include "anysr/image.hpp"

namespace anysr {

// Cubic interpolation kernel with sharpness a = -0.5 (two-lobe, support 4).
// Reproduces affine signals exactly and interpolates the sample grid.
inline double kernel_weight(double x) {
  constexpr double a = -0.5;
  const double ax = std::fabs(x);
  if (ax <= 1.0) return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
  if (ax < 2.0) return ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a;
  return 0.0;
}

struct ResizeSpec {
  double scale = 1.0;
  bool antialias = true;  // effective only when scale < 1
};

namespace detail {

// Precomputed source taps for one axis. For output index d the source
// coordinate is u = (d+0.5)/scale - 0.5; when antialiasing a downscale the
// kernel is stretched by 1/scale (support 4/scale). Tap weights are
// renormalized to sum 1 and indices clamped to the valid range.
struct AxisTaps {
  int taps = 0;                 // taps per output sample
  std::vector<int> index;       // out_dim * taps
  std::vector<double> weight;   // out_dim * taps
};

inline AxisTaps make_taps(int in_dim, int out_dim, double scale, bool antialias) {
  const bool shrink = antialias && scale < 1.0;
  const double kscale = shrink ? scale : 1.0;
  const double support = 2.0 / kscale;
  const int taps = static_cast<int>(std::ceil(2.0 * support)) + 2;

  AxisTaps t;
  t.taps = taps;
  t.index.resize(static_cast<std::size_t>(out_dim) * taps);
  t.weight.resize(static_cast<std::size_t>(out_dim) * taps);

  for (int d = 0; d < out_dim; ++d) {
    const double u = (d + 0.5) / scale - 0.5;
    const int left = static_cast<int>(std::floor(u - support));
    double sum = 0.0;
    for (int k = 0; k < taps; ++k) {
      const double w = kscale * kernel_weight((u - (left + k)) * kscale);
      t.weight[static_cast<std::size_t>(d) * taps + k] = w;
      sum += w;
    }
    for (int k = 0; k < taps; ++k) {
      const std::size_t at = static_cast<std::size_t>(d) * taps + k;
      t.weight[at] /= sum;
      int idx = left + k;
      t.index[at] = idx < 0 ? 0 : (idx >= in_dim ? in_dim - 1 : idx);
    }
  }
  return t;
}

// Separable resize of an output sub-rectangle. The horizontal pass runs
// first, over exactly the source rows the vertical taps touch, so results
// are bitwise equal to cropping a full resize to the same rectangle.
inline Image resize_rect(const Image& img, int out_h, int out_w, double scale_y,
                         double scale_x, bool antialias, int rx, int ry, int rw, int rh) {
  if (out_h < 1 || out_w < 1)
    throw InvalidArgument("resize: output size is degenerate");
  if (rx < 0 || ry < 0 || rw < 1 || rh < 1 || rx + rw > out_w || ry + rh > out_h)
    throw InvalidArgument("resize: rectangle out of bounds");

  const AxisTaps tx = make_taps(img.width(), out_w, scale_x, antialias);
  const AxisTaps ty = make_taps(img.height(), out_h, scale_y, antialias);

  // Source rows needed by the vertical taps of rows [ry, ry+rh).
  int row_lo = img.height(), row_hi = -1;
  for (int d = ry; d < ry + rh; ++d)
    for (int k = 0; k < ty.taps; ++k) {
      const int idx = ty.index[static_cast<std::size_t>(d) * ty.taps + k];
      row_lo = std::min(row_lo, idx);
      row_hi = std::max(row_hi, idx);
    }
  const int mid_rows = row_hi - row_lo + 1;

  Image out(img.channels(), rh, rw);
  std::vector<double> mid(static_cast<std::size_t>(mid_rows) * rw);
  for (int c = 0; c < img.channels(); ++c) {
    const float* src = img.plane(c);
    for (int y = 0; y < mid_rows; ++y) {
      const float* row = src + static_cast<std::size_t>(row_lo + y) * img.width();
      for (int x = 0; x < rw; ++x) {
        const std::size_t base = static_cast<std::size_t>(rx + x) * tx.taps;
        double acc = 0.0;
        for (int k = 0; k < tx.taps; ++k)
          acc += tx.weight[base + k] * static_cast<double>(row[tx.index[base + k]]);
        mid[static_cast<std::size_t>(y) * rw + x] = acc;
      }
    }
    for (int y = 0; y < rh; ++y) {
      const std::size_t base = static_cast<std::size_t>(ry + y) * ty.taps;
      float* dst = out.plane(c) + static_cast<std::size_t>(y) * rw;
      for (int x = 0; x < rw; ++x) {
        double acc = 0.0;
        for (int k = 0; k < ty.taps; ++k)
          acc += ty.weight[base + k] * mid[static_cast<std::size_t>(ty.index[base + k] - row_lo) * rw + x];
        dst[x] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

}  // namespace detail

// Resize by a positive decimal factor; output is ceil(dim * scale) per axis.
inline Image resize(const Image& img, const ResizeSpec& spec) {
  if (!(spec.scale > 0.0)) throw InvalidArgument("resize: scale must be positive");
  const int out_h = static_cast<int>(std::ceil(img.height() * spec.scale));
  const int out_w = static_cast<int>(std::ceil(img.width() * spec.scale));
  if (out_h < 1 || out_w < 1) throw InvalidArgument("resize: output size is degenerate");
  return detail::resize_rect(img, out_h, out_w, spec.scale, spec.scale, spec.antialias,
                             0, 0, out_w, out_h);
}

inline Image resize(const Image& img, double scale, bool antialias = true) {
  return resize(img, ResizeSpec{scale, antialias});
}

// Computes crop(resize(img, scale), rx, ry, rw, rh) without materializing the
// full resized image; bitwise equal to doing exactly that.
inline Image resize_window(const Image& img, double scale, int rx, int ry, int rw, int rh,
                           bool antialias = true) {
  if (!(scale > 0.0)) throw InvalidArgument("resize_window: scale must be positive");
  const int out_h = static_cast<int>(std::ceil(img.height() * scale));
  const int out_w = static_cast<int>(std::ceil(img.width() * scale));
  return detail::resize_rect(img, out_h, out_w, scale, scale, antialias, rx, ry, rw, rh);
}

// Benchmark-style degradation: LR is resize(hr, 1/scale) with antialiasing,
// truncated to floor(dim/scale) per axis, and hr_ref is the top-left crop of
// hr sized so that resize(lr, scale) and hr_ref always agree. Keeping the LR
// mapping at exactly 1/scale puts SR output pixel x on HR pixel x.
inline std::pair<Image, Image> degrade_pair(const Image& hr, double scale) {
  if (!(scale > 1.0)) throw InvalidArgument("degrade_pair: scale must exceed 1");
  const int lr_h = static_cast<int>(std::floor(hr.height() / scale));
  const int lr_w = static_cast<int>(std::floor(hr.width() / scale));
  if (lr_h < 8 || lr_w < 8)
    throw InvalidArgument("degrade_pair: LR output would be degenerate (< 8 px)");
  Image lr = detail::resize_rect(hr, lr_h, lr_w, 1.0 / scale, 1.0 / scale, true,
                                 0, 0, lr_w, lr_h);
  const int ref_h = static_cast<int>(std::ceil(lr_h * scale));
  const int ref_w = static_cast<int>(std::ceil(lr_w * scale));
  Image hr_ref = crop(hr, 0, 0, ref_w, ref_h);
  return {std::move(lr), std::move(hr_ref)};
}

}  // namespace anysr
