// image.hpp : planar float image type, cropping, color conversion, augmentation
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
#include <cstddef>
#include <utility>
#include <vector>

#include "anysr/common.hpp"

namespace anysr {

// Planar float image. Channel-major layout: data[c*h*w + y*w + x].
// Values are nominally in [0,1]; intermediate results may drift outside and
// are clamped only at save time and before metrics.
class Image {
 public:
  Image() = default;
  Image(int channels, int height, int width, float fill = 0.0f)
      : channels_(channels), height_(height), width_(width),
        data_(static_cast<std::size_t>(channels) * height * width, fill) {
    if (channels < 1 || height < 1 || width < 1)
      throw InvalidArgument("Image: dimensions must be positive");
  }

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  float& at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  float at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }

  float* plane(int c) { return data_.data() + static_cast<std::size_t>(c) * height_ * width_; }
  const float* plane(int c) const {
    return data_.data() + static_cast<std::size_t>(c) * height_ * width_;
  }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  bool same_shape(const Image& o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

inline Image crop(const Image& img, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > img.width() || y0 + h > img.height())
    throw InvalidArgument("crop: rectangle out of bounds");
  Image out(img.channels(), h, w);
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < h; ++y) {
      const float* src = img.plane(c) + static_cast<std::size_t>(y0 + y) * img.width() + x0;
      std::copy(src, src + w, out.plane(c) + static_cast<std::size_t>(y) * w);
    }
  return out;
}

inline Image shave_border(const Image& img, int n) {
  if (n < 0) throw InvalidArgument("shave_border: negative border");
  if (n == 0) return img;
  if (2 * n >= std::min(img.height(), img.width()))
    throw InvalidArgument("shave_border: border exceeds image");
  return crop(img, n, n, img.width() - 2 * n, img.height() - 2 * n);
}

// ITU-R BT.601 studio-swing luma on [0,1] inputs. Output stays in
// [16/255, 235/255] for inputs in [0,1].
inline Image rgb_to_luma(const Image& img) {
  if (img.channels() != 3) throw InvalidArgument("rgb_to_luma: expects 3 channels");
  Image out(1, img.height(), img.width());
  const float* r = img.plane(0);
  const float* g = img.plane(1);
  const float* b = img.plane(2);
  float* y = out.plane(0);
  const std::size_t n = static_cast<std::size_t>(img.height()) * img.width();
  for (std::size_t i = 0; i < n; ++i)
    y[i] = (65.481f * r[i] + 128.553f * g[i] + 24.966f * b[i] + 16.0f) / 255.0f;
  return out;
}

// One of the 8 dihedral transforms: bit 0 selects a horizontal flip (applied
// first), bits 1-2 the number of 90-degree counter-clockwise rotations
// (applied second). Quarter turns require a square image.
inline Image apply_dihedral(const Image& img, int op) {
  if (op < 0 || op > 7) throw InvalidArgument("apply_dihedral: op must be in [0,7]");
  const bool hflip = (op & 1) != 0;
  const int rot = (op >> 1) & 3;
  if (rot % 2 == 1 && img.height() != img.width())
    throw InvalidArgument("apply_dihedral: quarter turn requires a square image");

  const int h = img.height(), w = img.width();
  Image out(img.channels(), h, w);
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        // Pull back through the rotation, then through the flip.
        int sy, sx;
        switch (rot) {
          case 1: sy = x; sx = w - 1 - y; break;   // inverse of 90 CCW
          case 2: sy = h - 1 - y; sx = w - 1 - x; break;
          case 3: sy = h - 1 - x; sx = y; break;   // inverse of 270 CCW
          default: sy = y; sx = x; break;
        }
        if (hflip) sx = w - 1 - sx;
        out.at(c, y, x) = img.at(c, sy, sx);
      }
  return out;
}

// Interpolated-LR input patch and its HR target, both P x P, for one scale.
struct PatchPair {
  Image input;
  Image target;
  double scale = 1.0;
};

// Same random transform applied to both patches; draw is uniform over
// {identity, h-flip} x {0, 90, 180, 270}.
inline PatchPair augment(const PatchPair& pair, Rng& rng) {
  if (!pair.input.same_shape(pair.target))
    throw InvalidArgument("augment: input/target shape mismatch");
  const int op = static_cast<int>(rng.bounded(8));
  return PatchPair{apply_dihedral(pair.input, op), apply_dihedral(pair.target, op),
                   pair.scale};
}

}  // namespace anysr
