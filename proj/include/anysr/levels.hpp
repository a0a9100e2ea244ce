// levels.hpp : pyramid level grid over (1,2], phase/weight lookup, and
// blending of the two neighboring level outputs into the HR estimate
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
#include <functional>
#include <map>
#include <vector>

#include "anysr/common.hpp"
#include "anysr/image.hpp"
#include "anysr/resample.hpp"

namespace anysr {

// The scales r_l = l/(L-1) + 1 the network's reconstruction heads are
// trained for: r_0 = 1.0 up to r_{L-1} = 2.0, evenly spaced.
struct LevelGrid {
  int level_count = 0;
  std::vector<double> scales;
};

inline LevelGrid level_scales(int level_count) {
  if (level_count < 2) throw InvalidArgument("level_scales: need at least 2 levels");
  LevelGrid g;
  g.level_count = level_count;
  g.scales.resize(level_count);
  for (int l = 0; l < level_count; ++l)
    g.scales[l] = static_cast<double>(l) / (level_count - 1) + 1.0;
  return g;
}

// Phase index i in [1, L-1] locates r between grid scales r_{i-1} and r_i;
// the weight (L-1)*(r_i - r) is the share of the lower level, 0 on-grid.
struct PhaseWeight {
  int phase = 0;
  double weight = 0.0;
};

inline PhaseWeight phase_and_weight(double r, const LevelGrid& grid) {
  if (!(r > 1.0) || !(r <= 2.0))
    throw InvalidArgument("phase_and_weight: scale must be in (1, 2]");
  const int lm1 = grid.level_count - 1;
  // Scales computed exactly as level_scales() does land on weight 0.
  for (int l = 1; l < grid.level_count; ++l)
    if (r == grid.scales[l]) return {l, 0.0};
  int i = static_cast<int>(std::ceil(static_cast<double>(lm1) * (r - 1.0)));
  i = std::max(1, std::min(i, lm1));
  double w = static_cast<double>(lm1) * (grid.scales[i] - r);
  w = std::max(0.0, std::min(1.0, w));
  return {i, w};
}

// The per-level reconstructed HR images at a common resolution; levels that
// were not evaluated are simply absent.
using PyramidOutputs = std::map<int, Image>;

// Pixelwise (1-w) * O_i + w * O_{i-1}: the level-i output plus w times the
// difference image between the two neighboring levels.
inline Image interpolate_levels(const PyramidOutputs& outputs, const PhaseWeight& pw) {
  const auto hi = outputs.find(pw.phase);
  const auto lo = outputs.find(pw.phase - 1);
  if (hi == outputs.end() || lo == outputs.end())
    throw InvalidArgument("interpolate_levels: missing level output");
  if (!hi->second.same_shape(lo->second))
    throw InvalidArgument("interpolate_levels: level dimension mismatch");
  const float w = static_cast<float>(pw.weight);
  const float cw = static_cast<float>(1.0 - pw.weight);
  Image out = hi->second;
  const std::vector<float>& low = lo->second.data();
  for (std::size_t i = 0; i < out.data().size(); ++i)
    out.data()[i] = cw * out.data()[i] + w * low[i];
  return out;
}

// Contract a trained network (or any stand-in) fulfills: evaluate the
// requested pyramid levels on an already-interpolated LR input. A single
// call receives the full level set so shared work runs once.
class LevelPredictor {
 public:
  virtual ~LevelPredictor() = default;
  virtual int level_count() const = 0;
  virtual PyramidOutputs evaluate(const std::vector<int>& levels,
                                  const Image& interpolated_lr) const = 0;
};

using Upscaler = std::function<Image(const Image&, double)>;

inline Image bicubic_upscaler(const Image& img, double scale) {
  return resize(img, scale);
}

// HR reconstruction for a scale in (1,2]: upscale the input, evaluate only
// the two neighboring levels (one when r is on-grid), blend.
inline Image reconstruct(double r, const Image& lr, const LevelPredictor& predictor,
                         const Upscaler& upscale = bicubic_upscaler) {
  const LevelGrid grid = level_scales(predictor.level_count());
  const PhaseWeight pw = phase_and_weight(r, grid);
  const Image up = upscale(lr, r);
  if (pw.weight == 0.0) {
    PyramidOutputs out = predictor.evaluate({pw.phase}, up);
    return out.at(pw.phase);
  }
  PyramidOutputs out = predictor.evaluate({pw.phase - 1, pw.phase}, up);
  return interpolate_levels(out, pw);
}

}  // namespace anysr
