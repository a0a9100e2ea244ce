// gradcheck.hpp : central-difference verification of analytic gradients
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
#include <functional>
#include <vector>

#include "anysr/tensor.hpp"

namespace anysr {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0;  // probes that straddled a kink (fd invalid there)
};

// Compares analytic parameter gradients of a scalar loss against central
// differences. `loss(true)` must run forward + backward and leave gradients
// in the parameters; `loss(false)` must run forward only. Errors are
// relative to max(|analytic|, |numeric|) floored at 1e-3: gradients above
// that magnitude are held to the relative tolerance, smaller ones to the
// equivalent absolute one (the h^2 truncation noise of an exact gradient
// sits around 2e-8, well under either form).
//
// A central difference is meaningless when the probe interval straddles a
// kink (ReLU or L1 corner), so each probe is validated against a half-step
// difference first; the check uses forward values only, which keeps a broken
// backward detectable. Intended for double-precision fragments of test scale
// (< 5000 parameters).
template <typename T>
GradCheckReport finite_diff_check(const std::vector<Parameter<T>*>& params,
                                  const std::function<double(bool)>& loss,
                                  double step = 1e-3,
                                  std::size_t max_samples_per_param = 64) {
  for (Parameter<T>* p : params) p->zero_grad();
  const double base = loss(true);
  if (!std::isfinite(base)) throw InvalidArgument("finite_diff_check: non-finite loss");

  std::vector<std::vector<T>> analytic;
  analytic.reserve(params.size());
  for (Parameter<T>* p : params) analytic.push_back(p->grad.data);

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter<T>& p = *params[pi];
    const std::size_t count = p.value.data.size();
    const std::size_t samples = std::min(count, max_samples_per_param);
    for (std::size_t s = 0; s < samples; ++s) {
      // Evenly strided so every region of the tensor gets probed.
      const std::size_t i = s * count / samples;
      const T saved = p.value.data[i];
      auto probe = [&](double offset) {
        p.value.data[i] = saved + static_cast<T>(offset);
        const double value = loss(false);
        p.value.data[i] = saved;
        if (!std::isfinite(value))
          throw InvalidArgument("finite_diff_check: non-finite loss under perturbation");
        return value;
      };
      const double numeric = (probe(step) - probe(-step)) / (2.0 * step);
      const double half = (probe(step / 2) - probe(-step / 2)) / step;
      // A kink that slips past this consistency gate can corrupt the
      // difference by at most twice the gate, i.e. stays below 1e-4.
      if (std::fabs(numeric - half) >
          5e-5 * std::max({std::fabs(numeric), std::fabs(half), 1e-3})) {
        ++report.skipped;
        continue;
      }
      const double a = static_cast<double>(analytic[pi][i]);
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-3});
      report.max_rel_error = std::max(report.max_rel_error, std::fabs(a - numeric) / denom);
      ++report.samples;
    }
  }
  for (Parameter<T>* p : params) p->zero_grad();
  return report;
}

}  // namespace anysr
