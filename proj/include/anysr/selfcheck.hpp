// selfcheck.hpp : built-in gradient checks and quick invariant checks
// backing the `gradcheck` and `selftest` CLI subcommands
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
#include <utility>
#include <vector>

#include "anysr/gradcheck.hpp"
#include "anysr/graph.hpp"
#include "anysr/levels.hpp"
#include "anysr/network.hpp"
#include "anysr/resample.hpp"
#include "anysr/schedule.hpp"
#include "anysr/tensor.hpp"

namespace anysr {

namespace detail {

inline Tensor4<double> random_tensor(int n, int c, int h, int w, Rng& rng) {
  Tensor4<double> t(n, c, h, w);
  for (double& v : t.data) v = rng.uniform();
  return t;
}

// Builds the fragment once to place the L1 target a safe distance from the
// unperturbed output (random signs, offsets in [0.25, 0.75]): the 1e-3
// probes then never cross the loss kink, while the gradient seed still
// carries a diverse sign pattern.
template <typename BuildFn>
GradCheckReport check_fragment(std::vector<Parameter<double>*> params, BuildFn&& build,
                               std::size_t samples_per_param = 24) {
  Tensor4<double> target;
  {
    Graph<double> g;
    target = g.value(build(g));
    Rng rng(424242);
    for (double& v : target.data)
      v += (rng.bounded(2) ? 1.0 : -1.0) * rng.uniform(0.25, 0.75);
  }
  auto loss = [&build, &target](bool with_grad) -> double {
    Graph<double> g;
    auto out = build(g);
    auto [value, grad] = nn::l1_loss(g.value(out), target);
    if (with_grad) g.backward(out, grad);
    return value;
  };
  return finite_diff_check<double>(params, loss, 1e-3, samples_per_param);
}

}  // namespace detail

struct GradCheckCase {
  std::string name;
  GradCheckReport report;
};

// Central-difference gradient verification (double precision) of each layer
// family and of a complete small network.
inline std::vector<GradCheckCase> gradcheck_suite() {
  std::vector<GradCheckCase> cases;
  Rng rng(20240901);

  {  // plain 3x3 convolution
    Tensor4<double> w(4, 3, 3, 3);
    nn::he_uniform_fill(w, 27, rng);
    Parameter<double> pw("w", std::move(w));
    Parameter<double> pb("b", detail::random_tensor(1, 4, 1, 1, rng));
    const Tensor4<double> x = detail::random_tensor(2, 3, 5, 5, rng);
    auto report = detail::check_fragment(
        {&pw, &pb},
        [&](Graph<double>& g) { return g.conv2d(g.input(x), pw, pb, true); });
    cases.push_back({"conv3x3", report});
  }

  {  // channel-attention unit
    Tensor4<double> wr(2, 6, 1, 1), we(6, 2, 1, 1);
    nn::he_uniform_fill(wr, 6, rng);
    nn::he_uniform_fill(we, 2, rng);
    Parameter<double> pwr("ca_reduce.w", std::move(wr));
    Parameter<double> pbr("ca_reduce.b", detail::random_tensor(1, 2, 1, 1, rng));
    Parameter<double> pwe("ca_expand.w", std::move(we));
    Parameter<double> pbe("ca_expand.b", detail::random_tensor(1, 6, 1, 1, rng));
    const Tensor4<double> x = detail::random_tensor(2, 6, 4, 4, rng);
    auto report = detail::check_fragment(
        {&pwr, &pbr, &pwe, &pbe},
        [&](Graph<double>& g) {
          const auto in = g.input(x);
          const auto gate = g.sigmoid(g.conv2d(
              g.relu(g.conv2d(g.global_avg_pool(in), pwr, pbr, true)), pwe, pbe, true));
          return g.mul(in, gate);
        });
    cases.push_back({"channel_attention", report});
  }

  {  // spatial-attention unit
    Tensor4<double> wr(3, 3, 1, 1), wg(1, 3, 1, 1);
    nn::he_uniform_fill(wr, 3, rng);
    nn::he_uniform_fill(wg, 3, rng);
    Parameter<double> pwr("sa_reduce.w", std::move(wr));
    Parameter<double> pbr("sa_reduce.b", detail::random_tensor(1, 3, 1, 1, rng));
    Parameter<double> pwg("sa_gate.w", std::move(wg));
    Parameter<double> pbg("sa_gate.b", detail::random_tensor(1, 1, 1, 1, rng));
    const Tensor4<double> x = detail::random_tensor(2, 3, 5, 5, rng);
    auto report = detail::check_fragment(
        {&pwr, &pbr, &pwg, &pbg},
        [&](Graph<double>& g) {
          const auto in = g.input(x);
          const auto mask = g.sigmoid(
              g.conv2d(g.relu(g.conv2d(in, pwr, pbr, true)), pwg, pbg, true));
          return g.mul(in, mask);
        });
    cases.push_back({"spatial_attention", report});
  }

  {  // one dense attention block inside a minimal network
    ModelConfig cfg;
    cfg.num_blocks = 1;
    cfg.dense_layers = 2;
    cfg.base_channels = 4;
    cfg.growth_channels = 4;
    cfg.level_count = 2;
    cfg.ca_reduction = 2;
    cfg.sa_enabled = false;
    cfg.seed = 7;
    Network<double> net(cfg);
    const Tensor4<double> x = detail::random_tensor(1, 3, 6, 6, rng);
    auto report = detail::check_fragment(
        net.parameters(),
        [&](Graph<double>& g) { return net.build_forward(g, g.input(x), {0}).at(0); },
        12);
    cases.push_back({"dense_attention_block", report});
  }

  {  // complete small network, all units enabled
    ModelConfig cfg;
    cfg.num_blocks = 2;
    cfg.dense_layers = 2;
    cfg.base_channels = 6;
    cfg.growth_channels = 6;
    cfg.level_count = 3;
    cfg.ca_reduction = 2;
    cfg.seed = 11;
    Network<double> net(cfg);
    const Tensor4<double> x = detail::random_tensor(1, 3, 6, 6, rng);
    auto report = detail::check_fragment(
        net.parameters(),
        [&](Graph<double>& g) { return net.build_forward(g, g.input(x), {1}).at(1); },
        8);
    cases.push_back({"full_network_fragment", report});
  }

  return cases;
}

struct SelfTestCase {
  std::string name;
  bool pass = false;
};

// Fast invariant checks with no filesystem or dataset dependencies.
inline std::vector<SelfTestCase> selftest_suite() {
  std::vector<SelfTestCase> cases;
  auto expect = [&cases](const std::string& name, bool ok) { cases.push_back({name, ok}); };

  expect("kernel_center_one", kernel_weight(0.0) == 1.0);
  expect("kernel_knots_zero", kernel_weight(1.0) == 0.0 && kernel_weight(2.0) == 0.0);
  expect("kernel_half", std::fabs(kernel_weight(0.5) - 0.5625) < 1e-15);

  {
    const LevelGrid g = level_scales(11);
    bool ok = g.scales.front() == 1.0 && g.scales.back() == 2.0;
    for (int l = 0; l < 11; ++l) ok = ok && std::fabs(g.scales[l] - (1.0 + 0.1 * l)) < 1e-12;
    expect("level_grid_11", ok);
    const PhaseWeight pw = phase_and_weight(1.32, g);
    expect("phase_weight_example", pw.phase == 4 && std::fabs(pw.weight - 0.8) < 1e-9);
    const PhaseWeight on = phase_and_weight(g.scales[5], g);
    expect("on_grid_weight_zero", on.phase == 5 && on.weight == 0.0);
  }

  {
    const UpscalePlan p3 = make_plan(3.0);
    expect("plan_3", p3.steps == std::vector<double>({2.0, 1.5}));
    const UpscalePlan p4 = make_plan(4.0);
    expect("plan_4", p4.steps == std::vector<double>({2.0, 2.0}));
    const UpscalePlan eq = make_equal_plan(3.0, 2);
    expect("plan_equal_3_2",
           eq.steps.size() == 2 && std::fabs(eq.steps[0] - std::sqrt(3.0)) < 1e-12);
    bool product_ok = true;
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      const double target = 1.0 + rng.uniform() * 31.0;
      const UpscalePlan p = make_plan(target);
      double prod = 1.0;
      for (double s : p.steps) prod *= s;
      product_ok = product_ok && std::fabs(prod - target) <= 1e-9 * target;
    }
    expect("plan_product_fuzz", product_ok);
  }

  {
    Image a(3, 4, 4, 0.25f), b(3, 4, 4, 0.25f);
    PyramidOutputs outs;
    outs.emplace(2, a);
    outs.emplace(3, b);
    const Image mid = interpolate_levels(outs, PhaseWeight{3, 0.5});
    expect("interpolate_constant", mid.at(0, 0, 0) == 0.25f);
  }

  {
    Tensor4f x(1, 2, 3, 3);
    Rng rng(3);
    for (float& v : x.data) v = static_cast<float>(rng.uniform());
    Tensor4f w(2, 2, 1, 1);
    w.at(0, 0, 0, 0) = 1.0f;
    w.at(1, 1, 0, 0) = 1.0f;
    const Tensor4f y = nn::conv2d_forward(x, w, Tensor4f(1, 2, 1, 1), true);
    expect("conv_identity_1x1", y.data == x.data);
  }

  {
    Tensor4f a(1, 1, 2, 2, 0.5f), b(1, 1, 2, 2, 0.0f);
    auto [loss, grad] = nn::l1_loss(a, b);
    expect("l1_example", std::fabs(loss - 0.5) < 1e-12 && grad.data[0] == 0.25f);
  }

  return cases;
}

}  // namespace anysr
