// metrics.hpp : PSNR and SSIM under a configurable evaluation protocol
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

#include <cmath>
#include <limits>
#include <vector>

#include "anysr/common.hpp"
#include "anysr/image.hpp"

namespace anysr {

enum class MetricChannel { kLuma, kRgb };

// Evaluation protocol. The default (luma channel, border shave of
// ceil(scale) pixels) is the dominant convention in SR benchmarking; both
// knobs are configurable because published tables rarely state them.
struct EvalProtocol {
  MetricChannel channel = MetricChannel::kLuma;
  int border_shave = 0;          // pixels removed on every side before metrics
  double peak = 1.0;             // float-domain peak (255-equivalent in dB)
  int ssim_window = 11;
  double ssim_sigma = 1.5;
  double ssim_k1 = 0.01;
  double ssim_k2 = 0.03;

  static EvalProtocol for_scale(double scale, MetricChannel ch = MetricChannel::kLuma) {
    EvalProtocol p;
    p.channel = ch;
    p.border_shave = static_cast<int>(std::ceil(scale));
    return p;
  }
};

namespace detail {

inline Image clamp_unit(const Image& img) {
  Image out = img;
  for (float& v : out.data()) v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return out;
}

// Clamp, select the metric channel, shave the border.
inline Image metric_view(const Image& img, const EvalProtocol& p) {
  Image v = clamp_unit(img);
  if (p.channel == MetricChannel::kLuma && v.channels() == 3) v = rgb_to_luma(v);
  return shave_border(v, p.border_shave);
}

}  // namespace detail

// 10*log10(peak^2 / MSE); identical images give +infinity.
inline double psnr(const Image& a, const Image& b, const EvalProtocol& p = {}) {
  Image va = detail::metric_view(a, p);
  Image vb = detail::metric_view(b, p);
  if (!va.same_shape(vb)) throw InvalidArgument("psnr: shape mismatch after protocol");
  double se = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = static_cast<double>(va.data()[i]) - vb.data()[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(va.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(p.peak * p.peak / mse);
}

// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5) and the standard
// stabilizing constants; windows are evaluated where they fit entirely.
// Multi-channel inputs under the RGB protocol average per-channel SSIM.
inline double ssim(const Image& a, const Image& b, const EvalProtocol& p = {}) {
  Image va = detail::metric_view(a, p);
  Image vb = detail::metric_view(b, p);
  if (!va.same_shape(vb)) throw InvalidArgument("ssim: shape mismatch after protocol");
  const int win = p.ssim_window;
  if (va.height() < win || va.width() < win)
    throw InvalidArgument("ssim: image smaller than the window");

  std::vector<double> g(static_cast<std::size_t>(win) * win);
  const int half = win / 2;
  double gsum = 0.0;
  for (int y = 0; y < win; ++y)
    for (int x = 0; x < win; ++x) {
      const double dy = y - half, dx = x - half;
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * p.ssim_sigma * p.ssim_sigma));
      g[static_cast<std::size_t>(y) * win + x] = w;
      gsum += w;
    }
  for (double& w : g) w /= gsum;

  const double c1 = (p.ssim_k1 * p.peak) * (p.ssim_k1 * p.peak);
  const double c2 = (p.ssim_k2 * p.peak) * (p.ssim_k2 * p.peak);

  double total = 0.0;
  for (int c = 0; c < va.channels(); ++c) {
    double acc = 0.0;
    std::size_t count = 0;
    for (int y = 0; y + win <= va.height(); ++y)
      for (int x = 0; x + win <= va.width(); ++x) {
        double mx = 0.0, my = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
        for (int j = 0; j < win; ++j)
          for (int i = 0; i < win; ++i) {
            const double w = g[static_cast<std::size_t>(j) * win + i];
            const double u = va.at(c, y + j, x + i);
            const double v = vb.at(c, y + j, x + i);
            mx += w * u;
            my += w * v;
            xx += w * u * u;
            yy += w * v * v;
            xy += w * u * v;
          }
        const double sx = xx - mx * mx;
        const double sy = yy - my * my;
        const double sxy = xy - mx * my;
        acc += ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) /
               ((mx * mx + my * my + c1) * (sx + sy + c2));
        ++count;
      }
    total += acc / static_cast<double>(count);
  }
  return total / va.channels();
}

}  // namespace anysr
