// synth.hpp : deterministic procedural test images (edges, texture, ramps)
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
#include <string>

#include "anysr/common.hpp"
#include "anysr/image.hpp"
#include "anysr/png_io.hpp"

namespace testsupport {

namespace detail {

// Bilinearly interpolated random lattice (one octave of value noise).
inline std::vector<double> noise_octave(int height, int width, int cell, anysr::Rng& rng) {
  const int gh = height / cell + 2, gw = width / cell + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gh) * gw);
  for (double& v : lattice) v = rng.uniform();
  std::vector<double> out(static_cast<std::size_t>(height) * width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double fy = static_cast<double>(y) / cell, fx = static_cast<double>(x) / cell;
      const int iy = static_cast<int>(fy), ix = static_cast<int>(fx);
      const double ty = fy - iy, tx = fx - ix;
      auto at = [&](int yy, int xx) { return lattice[static_cast<std::size_t>(yy) * gw + xx]; };
      const double top = at(iy, ix) * (1 - tx) + at(iy, ix + 1) * tx;
      const double bot = at(iy + 1, ix) * (1 - tx) + at(iy + 1, ix + 1) * tx;
      out[static_cast<std::size_t>(y) * width + x] = top * (1 - ty) + ty * bot;
    }
  return out;
}

}  // namespace detail

// Natural-ish procedural content: multi-octave shading, oriented sinusoids
// at randomized frequencies, soft disks and checkers of varying cell size.
// Every variant draws its own geometry so a directory of these behaves like
// a small, scale-diverse corpus.
inline anysr::Image synth_image(int height, int width, std::uint64_t variant) {
  anysr::Rng rng(variant * 7919 + 17);

  const std::vector<double> coarse = detail::noise_octave(height, width, 24, rng);
  const std::vector<double> mid = detail::noise_octave(height, width, 9, rng);
  const std::vector<double> fine = detail::noise_octave(height, width, 4, rng);

  const double theta1 = rng.uniform(0.0, 3.14159265), theta2 = rng.uniform(0.0, 3.14159265);
  const double f1 = rng.uniform(0.03, 0.22), f2 = rng.uniform(0.02, 0.12);
  const int cell = 3 + static_cast<int>(rng.bounded(10));
  const double cx = rng.uniform(0.2, 0.8) * width, cy = rng.uniform(0.2, 0.8) * height;
  const double cx2 = rng.uniform(0.2, 0.8) * width, cy2 = rng.uniform(0.2, 0.8) * height;
  const double rad = rng.uniform(0.1, 0.35) * std::min(width, height);
  const double rad2 = rng.uniform(0.05, 0.2) * std::min(width, height);
  const double c1 = std::cos(theta1), s1 = std::sin(theta1);
  const double c2 = std::cos(theta2), s2 = std::sin(theta2);

  anysr::Image img(3, height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      const double stripe = 0.5 + 0.5 * std::sin(f1 * (c1 * x + s1 * y) * 6.2831853);
      const double wave = 0.5 + 0.5 * std::sin(f2 * (c2 * x - s2 * y) * 6.2831853);
      const double d = std::hypot(x - cx, y - cy);
      const double disk = d < rad ? 1.0 : (d < rad + 2.0 ? (rad + 2.0 - d) / 2.0 : 0.0);
      const double d2 = std::hypot(x - cx2, y - cy2);
      const double disk2 = d2 < rad2 ? 1.0 : (d2 < rad2 + 1.5 ? (rad2 + 1.5 - d2) / 1.5 : 0.0);
      const double checker = ((x / cell + y / cell) % 2 == 0) ? 0.8 : 0.2;
      const double shade = 0.6 * coarse[i] + 0.3 * mid[i] + 0.1 * fine[i];
      img.at(0, y, x) = static_cast<float>(
          0.35 * stripe + 0.3 * disk + 0.25 * shade + 0.1 * checker);
      img.at(1, y, x) = static_cast<float>(
          0.3 * wave + 0.25 * checker + 0.25 * shade + 0.2 * (1.0 - disk2));
      img.at(2, y, x) = static_cast<float>(
          0.3 * stripe * wave + 0.2 * disk2 + 0.3 * shade + 0.2 * (1.0 - checker));
    }
  return img;
}

// Writes `count` synthetic PNGs into dir (created if needed).
inline void write_synth_corpus(const std::string& dir, int count, int height, int width,
                               std::uint64_t seed = 1) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "img%03d.png", i);
    anysr::save_image(synth_image(height, width, seed + i), dir + "/" + name);
  }
}

inline anysr::Image random_image(int channels, int height, int width, std::uint64_t seed) {
  anysr::Rng rng(seed);
  anysr::Image img(channels, height, width);
  for (float& v : img.data()) v = static_cast<float>(rng.uniform());
  return img;
}

}  // namespace testsupport
