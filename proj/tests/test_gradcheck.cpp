// test_gradcheck.cpp : finite-difference verification of every backward
// path, with a corrupted-backward negative control
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

#include "anysr/gradcheck.hpp"
#include "anysr/graph.hpp"
#include "anysr/network.hpp"
#include "anysr/selfcheck.hpp"

using namespace anysr;

TEST_CASE("analytic gradients agree with central differences", "[gradcheck]") {
  for (const GradCheckCase& c : gradcheck_suite()) {
    INFO(c.name << ": max rel error " << c.report.max_rel_error << " over " << c.report.samples
                << " samples");
    CHECK(c.report.max_rel_error <= 1e-4);
    CHECK(c.report.samples > 0);
  }
}

TEST_CASE("full network fragment stays test-scale", "[gradcheck]") {
  ModelConfig cfg;
  cfg.num_blocks = 2;
  cfg.dense_layers = 2;
  cfg.base_channels = 6;
  cfg.growth_channels = 6;
  cfg.level_count = 3;
  cfg.ca_reduction = 2;
  CHECK(param_count(cfg) < 5000);
}

TEST_CASE("a corrupted backward fails the check", "[gradcheck]") {
  Rng rng(31);
  Tensor4<double> w(2, 2, 3, 3);
  nn::he_uniform_fill(w, 18, rng);
  Parameter<double> pw("w", std::move(w));
  Parameter<double> pb("b", Tensor4<double>(1, 2, 1, 1));
  Tensor4<double> x(1, 2, 5, 5), target(1, 2, 5, 5);
  for (double& v : x.data) v = rng.uniform();
  for (double& v : target.data) v = rng.uniform();

  // ReLU whose backward under-reports the slope by 10%
  auto broken_fwd = [](const Tensor4<double>& in) { return nn::relu_forward(in); };
  auto broken_bwd = [](const Tensor4<double>& in, const Tensor4<double>& gy) {
    Tensor4<double> gx = gy;
    for (std::size_t i = 0; i < gx.data.size(); ++i)
      gx.data[i] = in.data[i] > 0 ? gx.data[i] * 0.9 : 0.0;
    return gx;
  };

  std::vector<Parameter<double>*> params{&pw, &pb};
  auto loss = [&](bool with_grad) -> double {
    Graph<double> g;
    const auto out = g.custom_unary(g.conv2d(g.input(x), pw, pb, true), broken_fwd, broken_bwd);
    auto [value, grad] = nn::l1_loss(g.value(out), target);
    if (with_grad) g.backward(out, grad);
    return value;
  };
  const GradCheckReport report = finite_diff_check<double>(params, loss, 1e-3, 32);
  CHECK(report.max_rel_error > 1e-2);
}

TEST_CASE("non-finite losses are rejected", "[gradcheck]") {
  Parameter<double> p("p", Tensor4<double>(1, 1, 1, 1, 1.0));
  std::vector<Parameter<double>*> params{&p};
  auto loss = [](bool) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(finite_diff_check<double>(params, loss), InvalidArgument);
}
