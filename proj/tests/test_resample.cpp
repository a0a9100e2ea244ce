// test_resample.cpp : bicubic kernel values, separable-vs-brute-force
// agreement, size rules, reference resampler goldens
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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "anysr/resample.hpp"
#include "support/goldens.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace anysr;

TEST_CASE("cubic kernel values", "[resample]") {
  CHECK(kernel_weight(0.0) == 1.0);
  CHECK(kernel_weight(1.0) == 0.0);
  CHECK(kernel_weight(-1.0) == 0.0);
  CHECK(kernel_weight(2.0) == 0.0);
  CHECK(kernel_weight(2.5) == 0.0);
  CHECK(kernel_weight(0.5) == Catch::Approx(0.5625).margin(1e-15));
  CHECK(kernel_weight(-0.5) == kernel_weight(0.5));
  CHECK(kernel_weight(1.5) == Catch::Approx(-0.0625).margin(1e-15));
}

TEST_CASE("resize identities", "[resample]") {
  const Image img = testsupport::random_image(3, 9, 7, 42);

  SECTION("scale 1 is bitwise identity") {
    const Image out = resize(img, 1.0);
    CHECK(out.data() == img.data());
  }

  SECTION("constant image stays constant at any scale") {
    Image flat(3, 10, 8, 0.37f);
    for (double s : {0.45, 0.7, 1.0, 1.3, 2.0, 2.6}) {
      const Image out = resize(flat, s);
      CHECK(out.height() == static_cast<int>(std::ceil(10 * s)));
      CHECK(out.width() == static_cast<int>(std::ceil(8 * s)));
      for (float v : out.data()) CHECK(v == 0.37f);
    }
  }

  SECTION("horizontal ramp doubles to exact linear interior values") {
    Image ramp(1, 4, 16);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 16; ++x) ramp.at(0, y, x) = 0.05f * x;
    const Image out = resize(ramp, 2.0, false);
    // destination x maps to source (x+0.5)/2 - 0.5; the a=-0.5 kernel
    // reproduces affine signals exactly away from the clamped border
    for (int y = 2; y < 6; ++y)
      for (int x = 4; x < 28; ++x) {
        const double u = (x + 0.5) / 2.0 - 0.5;
        CHECK(out.at(0, y, x) == Catch::Approx(0.05 * u).margin(1e-6));
      }
  }
}

TEST_CASE("separable equals brute-force non-separable", "[resample]") {
  const Image img = testsupport::random_image(3, 7, 5, 7);
  const Image sep = resize(img, 1.3);
  const Image brute = testsupport::brute_force_resize(img, 1.3);
  REQUIRE(sep.same_shape(brute));
  for (std::size_t i = 0; i < sep.size(); ++i)
    CHECK(sep.data()[i] == Catch::Approx(brute.data()[i]).margin(1e-6));

  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 5 + static_cast<int>(rng.bounded(28));
    const int w = 5 + static_cast<int>(rng.bounded(28));
    const double scale = trial % 2 == 0 ? rng.uniform(0.3, 1.0) : rng.uniform(1.0, 3.0);
    const Image src = testsupport::random_image(3, h, w, 1000 + trial);
    const Image a = resize(src, scale);
    const Image b = testsupport::brute_force_resize(src, scale);
    REQUIRE(a.same_shape(b));
    double max_diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      max_diff = std::max(max_diff, std::fabs(static_cast<double>(a.data()[i]) - b.data()[i]));
    INFO("trial " << trial << " h=" << h << " w=" << w << " scale=" << scale);
    CHECK(max_diff <= 1e-6);
  }
}

TEST_CASE("resize matches the frozen float64 reference", "[resample]") {
  Image pattern(kResizePatternC, kResizePatternH, kResizePatternW);
  for (std::size_t i = 0; i < pattern.size(); ++i) pattern.data()[i] = kResizePattern[i];

  const Image up = resize(pattern, 1.3);
  REQUIRE(up.height() == kResizeUp13H);
  REQUIRE(up.width() == kResizeUp13W);
  for (std::size_t i = 0; i < up.size(); ++i)
    CHECK(up.data()[i] == Catch::Approx(kResizeUp13[i]).margin(1e-6));

  const Image down = resize(pattern, 0.6);
  REQUIRE(down.height() == kResizeDown06H);
  REQUIRE(down.width() == kResizeDown06W);
  for (std::size_t i = 0; i < down.size(); ++i)
    CHECK(down.data()[i] == Catch::Approx(kResizeDown06[i]).margin(1e-6));
}

TEST_CASE("resize range and sanity invariants", "[resample]") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Image src = testsupport::random_image(1, 12, 14, 300 + trial);
    const double scale = rng.uniform(0.4, 2.5);
    const Image out = resize(src, scale);
    float lo = 2.0f, hi = -1.0f;
    for (float v : src.data()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (float v : out.data()) {
      CHECK(std::isfinite(v));
      // bounded by kernel undershoot: sum |w| <= ~1.2 per axis
      CHECK(v >= lo - 0.45f * (hi - lo));
      CHECK(v <= hi + 0.45f * (hi - lo));
    }
  }

  // DC preservation for a constant image
  Image flat(1, 6, 6, 0.613f);
  const Image out = resize(flat, 1.77);
  double mean = 0;
  for (float v : out.data()) mean += v;
  mean /= static_cast<double>(out.size());
  CHECK(mean == Catch::Approx(0.613).margin(1e-7));

  CHECK_THROWS_AS(resize(flat, 0.0), InvalidArgument);
  CHECK_THROWS_AS(resize(flat, -1.5), InvalidArgument);
  // ceil sizing keeps a 1-pixel image alive at any positive scale
  const Image tiny = resize(Image(1, 1, 1, 0.8f), 0.2);
  CHECK(tiny.height() == 1);
  CHECK(tiny.width() == 1);
  CHECK(tiny.at(0, 0, 0) == 0.8f);
}

TEST_CASE("resize_window equals crop of the full resize", "[resample]") {
  const Image img = testsupport::random_image(3, 20, 24, 5150);
  Rng rng(8);
  for (int trial = 0; trial < 12; ++trial) {
    const double scale = trial % 2 == 0 ? rng.uniform(1.05, 2.0) : rng.uniform(0.5, 1.0);
    const Image full = resize(img, scale);
    const int rw = 1 + static_cast<int>(rng.bounded(full.width()));
    const int rh = 1 + static_cast<int>(rng.bounded(full.height()));
    const int rx = static_cast<int>(rng.bounded(full.width() - rw + 1));
    const int ry = static_cast<int>(rng.bounded(full.height() - rh + 1));
    const Image window = resize_window(img, scale, rx, ry, rw, rh);
    const Image reference = crop(full, rx, ry, rw, rh);
    REQUIRE(window.same_shape(reference));
    CHECK(window.data() == reference.data());  // bitwise
  }
}

TEST_CASE("degrade_pair size rules", "[resample]") {
  const Image hr100 = testsupport::random_image(3, 100, 100, 31);
  {
    auto [lr, ref] = degrade_pair(hr100, 2.0);
    CHECK(lr.height() == 50);
    CHECK(lr.width() == 50);
    CHECK(ref.height() == 100);
    CHECK(ref.width() == 100);
  }
  {
    auto [lr, ref] = degrade_pair(hr100, 1.5);
    CHECK(lr.height() == 66);
    CHECK(lr.width() == 66);
    CHECK(ref.height() == 99);  // ceil(66 * 1.5)
    CHECK(ref.width() == 99);
  }

  SECTION("resize(lr, scale) always matches the reference dims") {
    Rng rng(404);
    for (int trial = 0; trial < 200; ++trial) {
      const int h = 24 + static_cast<int>(rng.bounded(80));
      const int w = 24 + static_cast<int>(rng.bounded(80));
      const double scale = rng.uniform(1.05, 2.8);
      if (std::floor(h / scale) < 8 || std::floor(w / scale) < 8) continue;
      const Image hr = testsupport::random_image(1, h, w, 7000 + trial);
      auto [lr, ref] = degrade_pair(hr, scale);
      const Image sr = resize(lr, scale);
      CHECK(sr.height() == ref.height());
      CHECK(sr.width() == ref.width());
    }
  }

  CHECK_THROWS_AS(degrade_pair(hr100, 1.0), InvalidArgument);
  CHECK_THROWS_AS(degrade_pair(testsupport::random_image(3, 10, 10, 1), 2.0),
                  InvalidArgument);
}
