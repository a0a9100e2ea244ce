// schedule.hpp : factoring a target scale into per-recursion ratios in (1,2]
// and running the upscale/predict cycles
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
#include <vector>

#include "anysr/common.hpp"
#include "anysr/levels.hpp"

namespace anysr {

struct UpscalePlan {
  double target = 1.0;
  std::vector<double> steps;  // each in (1, 2], product == target
};

// N = ceil(log2 R) recursions: full 2x steps first, then the remainder
// R / 2^(N-1). Larger ratios early and fewer recursions perform best.
inline UpscalePlan make_plan(double target) {
  if (!(target > 1.0)) throw InvalidArgument("make_plan: target must exceed 1");
  UpscalePlan plan;
  plan.target = target;
  if (target <= 2.0) {
    plan.steps = {target};
    return plan;
  }
  int n = static_cast<int>(std::ceil(std::log2(target)));
  double last = target / std::ldexp(1.0, n - 1);
  while (last > 2.0) {  // guard against log2 rounding down at powers of two
    ++n;
    last = target / std::ldexp(1.0, n - 1);
  }
  while (n > 1 && last <= 1.0) {  // merge a degenerate final step away
    --n;
    last = target / std::ldexp(1.0, n - 1);
  }
  plan.steps.assign(n - 1, 2.0);
  plan.steps.push_back(last);
  return plan;
}

// N equal steps of R^(1/N); infeasible when that root exceeds 2.
inline UpscalePlan make_equal_plan(double target, int recursions) {
  if (!(target > 1.0)) throw InvalidArgument("make_equal_plan: target must exceed 1");
  if (recursions < 1) throw InvalidArgument("make_equal_plan: need at least 1 recursion");
  const double ratio = std::pow(target, 1.0 / recursions);
  if (ratio > 2.0)
    throw InvalidArgument("make_equal_plan: per-step ratio exceeds 2; use more recursions");
  UpscalePlan plan;
  plan.target = target;
  plan.steps.assign(recursions, ratio);
  return plan;
}

inline UpscalePlan make_custom_plan(const std::vector<double>& steps) {
  if (steps.empty()) throw InvalidArgument("make_custom_plan: empty step list");
  UpscalePlan plan;
  plan.target = 1.0;
  for (double s : steps) {
    if (!(s > 1.0) || !(s <= 2.0))
      throw InvalidArgument("make_custom_plan: every step must be in (1, 2]");
    plan.target *= s;
  }
  plan.steps = steps;
  return plan;
}

// Runs the plan: each recursion reconstructs at its ratio from the previous
// output, carried at full float precision throughout.
inline Image execute_plan(const UpscalePlan& plan, const Image& lr,
                          const LevelPredictor& predictor,
                          const Upscaler& upscale = bicubic_upscaler) {
  if (plan.steps.empty()) throw InvalidArgument("execute_plan: empty plan");
  Image current = lr;
  for (double ratio : plan.steps)
    current = reconstruct(ratio, current, predictor, upscale);
  return current;
}

}  // namespace anysr
