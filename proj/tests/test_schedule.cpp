// test_schedule.cpp : recursion plans, product invariants, execution sizes
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

#include "anysr/schedule.hpp"
#include "support/synth.hpp"

using namespace anysr;

namespace {

class IdentityPredictor : public LevelPredictor {
 public:
  explicit IdentityPredictor(int levels) : levels_(levels) {}
  int level_count() const override { return levels_; }
  PyramidOutputs evaluate(const std::vector<int>& levels, const Image& in) const override {
    PyramidOutputs out;
    for (int l : levels) out.emplace(l, in);
    return out;
  }

 private:
  int levels_;
};

double product(const UpscalePlan& plan) {
  double p = 1.0;
  for (double s : plan.steps) p *= s;
  return p;
}

}  // namespace

TEST_CASE("standard plans", "[schedule]") {
  CHECK(make_plan(3.0).steps == std::vector<double>({2.0, 1.5}));
  CHECK(make_plan(4.0).steps == std::vector<double>({2.0, 2.0}));
  CHECK(make_plan(2.0).steps == std::vector<double>({2.0}));
  CHECK(make_plan(1.7).steps == std::vector<double>({1.7}));

  const UpscalePlan p57 = make_plan(5.7);
  REQUIRE(p57.steps.size() == 3);  // ceil(log2 5.7) = 3
  CHECK(p57.steps[0] == 2.0);
  CHECK(p57.steps[1] == 2.0);
  CHECK(p57.steps[2] == Catch::Approx(1.425).margin(1e-12));

  CHECK_THROWS_AS(make_plan(1.0), InvalidArgument);
  CHECK_THROWS_AS(make_plan(0.5), InvalidArgument);
}

TEST_CASE("equal-ratio plans", "[schedule]") {
  const UpscalePlan eq32 = make_equal_plan(3.0, 2);
  REQUIRE(eq32.steps.size() == 2);
  CHECK(eq32.steps[0] == Catch::Approx(1.7320508075688772).margin(1e-12));
  CHECK(eq32.steps[0] == eq32.steps[1]);

  const UpscalePlan eq43 = make_equal_plan(4.0, 3);
  CHECK(eq43.steps[0] == Catch::Approx(1.5874010519681994).margin(1e-12));

  const UpscalePlan eq33 = make_equal_plan(3.0, 3);
  CHECK(eq33.steps[0] == Catch::Approx(1.4422495703074083).margin(1e-12));

  CHECK_THROWS_AS(make_equal_plan(4.0, 1), InvalidArgument);  // ratio 4 > 2
  CHECK_THROWS_AS(make_equal_plan(5.0, 2), InvalidArgument);  // sqrt(5) > 2
}

TEST_CASE("plan invariants over fuzzed targets", "[schedule]") {
  Rng rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const double target = 1.0 + rng.uniform() * 31.0;
    if (target <= 1.0) continue;
    const UpscalePlan plan = make_plan(target);
    INFO("target " << target);
    CHECK(std::fabs(product(plan) - target) <= 1e-9 * target);
    CHECK(plan.steps.size() ==
          static_cast<std::size_t>(std::max(1.0, std::ceil(std::log2(target)))));
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
      CHECK(plan.steps[i] > 1.0);
      CHECK(plan.steps[i] <= 2.0);
      if (i + 1 < plan.steps.size()) CHECK(plan.steps[i] >= plan.steps[i + 1]);
    }

    const int n = 1 + static_cast<int>(rng.bounded(4));
    if (std::pow(target, 1.0 / n) <= 2.0) {
      const UpscalePlan eq = make_equal_plan(target, n);
      CHECK(std::fabs(product(eq) - target) <= 1e-9 * target);
    }
  }
}

TEST_CASE("custom plans validate their steps", "[schedule]") {
  const UpscalePlan plan = make_custom_plan({2.0, 1.8, 1.1});
  CHECK(plan.target == Catch::Approx(3.96).margin(1e-12));
  CHECK_THROWS_AS(make_custom_plan({2.5}), InvalidArgument);
  CHECK_THROWS_AS(make_custom_plan({1.5, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(make_custom_plan({}), InvalidArgument);
}

TEST_CASE("execution chains the per-step size rule", "[schedule]") {
  IdentityPredictor identity(11);
  const Image lr24 = testsupport::synth_image(24, 24, 8);

  const Image x2 = execute_plan(make_plan(2.0), lr24, identity);
  CHECK(x2.height() == 48);
  CHECK(x2.width() == 48);

  const Image lr48 = testsupport::synth_image(48, 48, 9);
  const Image x3 = execute_plan(make_plan(3.0), lr48, identity);
  CHECK(x3.height() == 144);  // 48 -> 96 -> 144
  CHECK(x3.width() == 144);
  CHECK(x3.height() == resize(lr48, 3.0).height());

  SECTION("identity predictor equals the chained bicubic upscales") {
    const UpscalePlan plan = make_plan(3.0);
    Image chained = lr24;
    for (double s : plan.steps) chained = resize(chained, s);
    const Image out = execute_plan(plan, lr24, identity);
    REQUIRE(out.same_shape(chained));
    for (std::size_t i = 0; i < out.size(); ++i)
      CHECK(out.data()[i] == Catch::Approx(chained.data()[i]).margin(1e-6));
  }

  SECTION("single-step plans reconstruct exactly once") {
    class OneShotCounter : public LevelPredictor {
     public:
      int level_count() const override { return 11; }
      PyramidOutputs evaluate(const std::vector<int>& levels, const Image& in) const override {
        ++calls;
        PyramidOutputs out;
        for (int l : levels) out.emplace(l, in);
        return out;
      }
      mutable int calls = 0;
    } counter;
    execute_plan(make_plan(1.6), lr24, counter);
    CHECK(counter.calls == 1);
  }
}
