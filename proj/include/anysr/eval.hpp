// eval.hpp : dataset evaluation for the bicubic and model paths, recursion
// strategy benchmarking, level-density studies, CSV emission
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
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "anysr/common.hpp"
#include "anysr/image.hpp"
#include "anysr/levels.hpp"
#include "anysr/metrics.hpp"
#include "anysr/network.hpp"
#include "anysr/png_io.hpp"
#include "anysr/resample.hpp"
#include "anysr/schedule.hpp"

namespace anysr {

// Adapts a float network to the level-evaluation contract: one call runs the
// trunk once and only the requested reconstruction heads.
class NetworkPredictor : public LevelPredictor {
 public:
  explicit NetworkPredictor(const Network<float>& net) : net_(&net) {}

  int level_count() const override { return net_->config().level_count; }

  PyramidOutputs evaluate(const std::vector<int>& levels,
                          const Image& interpolated_lr) const override {
    if (interpolated_lr.channels() != 3)
      throw InvalidArgument("NetworkPredictor: expects a 3-channel image");
    Tensor4f x(1, 3, interpolated_lr.height(), interpolated_lr.width());
    std::copy(interpolated_lr.data().begin(), interpolated_lr.data().end(), x.data.begin());
    std::map<int, Tensor4f> outs = net_->forward(x, levels);
    PyramidOutputs result;
    for (auto& [l, t] : outs) {
      Image img(3, t.h, t.w);
      std::copy(t.data.begin(), t.data.end(), img.data().begin());
      result.emplace(l, std::move(img));
    }
    return result;
  }

 private:
  const Network<float>* net_;
};

struct ImageScore {
  std::string name;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalRow {
  std::string dataset;
  double scale = 0.0;
  std::string method;  // "bicubic" | "model" | "recursive-model" | plan label
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  std::vector<ImageScore> images;
};

namespace detail {

using SrFn = std::function<Image(const Image& lr)>;

// Shared evaluation walk: degrade every HR image, super-resolve the LR with
// the supplied path, compare against the reference crop. Results fold in
// sorted-filename order.
inline EvalRow eval_dataset(const std::string& dir, double scale, const SrFn& sr,
                            const std::string& method, const EvalProtocol& protocol) {
  const std::vector<std::string> names = list_png_files(dir);
  if (names.empty()) throw IoError(IoErrorKind::kMissingFile, dir + " contains no PNG images");
  EvalRow row;
  row.dataset = std::filesystem::path(dir).filename().string();
  if (row.dataset.empty()) row.dataset = dir;
  row.scale = scale;
  row.method = method;
  double psnr_sum = 0.0, ssim_sum = 0.0;
  for (const std::string& name : names) {
    const Image hr = load_image(dir + "/" + name);
    auto [lr, hr_ref] = degrade_pair(hr, scale);
    Image out = sr(lr);
    if (out.height() != hr_ref.height() || out.width() != hr_ref.width()) {
      if (out.height() < hr_ref.height() || out.width() < hr_ref.width())
        throw InvalidArgument("eval: SR output smaller than the reference");
      out = crop(out, 0, 0, hr_ref.width(), hr_ref.height());
    }
    ImageScore score;
    score.name = name;
    score.psnr = psnr(out, hr_ref, protocol);
    score.ssim = ssim(out, hr_ref, protocol);
    psnr_sum += score.psnr;
    ssim_sum += score.ssim;
    row.images.push_back(std::move(score));
  }
  row.mean_psnr = psnr_sum / static_cast<double>(row.images.size());
  row.mean_ssim = ssim_sum / static_cast<double>(row.images.size());
  return row;
}

}  // namespace detail

inline EvalRow eval_bicubic(const std::string& dir, double scale,
                            const EvalProtocol& protocol) {
  return detail::eval_dataset(
      dir, scale, [scale](const Image& lr) { return resize(lr, scale); }, "bicubic", protocol);
}

// Scale <= 2 runs the two-level reconstruction; larger scales run the
// recursive plan. The trained checkpoint must cover (1,2].
inline EvalRow eval_model(const std::string& dir, double scale, const Network<float>& net,
                          const EvalProtocol& protocol) {
  if (!(scale > 1.0)) throw InvalidArgument("eval_model: scale must exceed 1");
  NetworkPredictor predictor(net);
  if (scale <= 2.0)
    return detail::eval_dataset(
        dir, scale,
        [&predictor, scale](const Image& lr) { return reconstruct(scale, lr, predictor); },
        "model", protocol);
  const UpscalePlan plan = make_plan(scale);
  return detail::eval_dataset(
      dir, scale,
      [&predictor, &plan](const Image& lr) { return execute_plan(plan, lr, predictor); },
      "recursive-model", protocol);
}

inline std::string plan_label(const UpscalePlan& plan) {
  std::string s;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    if (i) s += "x";
    s += format_double(plan.steps[i], 6);
  }
  return s;
}

// One row per deployment plan for the same target scale, sorted by mean
// PSNR (best first). Outputs of over-shooting step chains are cropped to the
// reference size so every strategy is scored on identical pixels.
inline std::vector<EvalRow> bench_strategies(const std::string& dir, double target,
                                             const Network<float>& net,
                                             const std::vector<UpscalePlan>& plans,
                                             const EvalProtocol& protocol) {
  NetworkPredictor predictor(net);
  std::vector<EvalRow> rows;
  for (const UpscalePlan& plan : plans) {
    if (std::fabs(plan.target - target) > 1e-9 * target)
      throw InvalidArgument("bench_strategies: plan target does not match scale");
    rows.push_back(detail::eval_dataset(
        dir, target,
        [&predictor, &plan](const Image& lr) { return execute_plan(plan, lr, predictor); },
        plan_label(plan), protocol));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const EvalRow& a, const EvalRow& b) { return a.mean_psnr > b.mean_psnr; });
  return rows;
}

struct DensityPoint {
  int level_count = 0;
  double scale = 0.0;
  double psnr = 0.0;
};

// PSNR-vs-scale curves for checkpoints trained with different level grids.
inline std::vector<DensityPoint> density_study(
    const std::string& dir, const std::vector<const Network<float>*>& models,
    const std::vector<double>& scales, const EvalProtocol& protocol) {
  std::vector<DensityPoint> points;
  for (const Network<float>* net : models)
    for (double s : scales) {
      EvalProtocol p = protocol;
      p.border_shave = static_cast<int>(std::ceil(s));
      const EvalRow row = eval_model(dir, s, *net, p);
      points.push_back({net->config().level_count, s, row.mean_psnr});
    }
  return points;
}

// --- CSV emission (UTF-8, '.' decimals, LF line endings) -------------------

inline void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(IoErrorKind::kWriteFailed, "cannot write " + path);
  os << "dataset,scale,method,image,psnr,ssim\n";
  for (const EvalRow& row : rows) {
    for (const ImageScore& s : row.images)
      os << row.dataset << ',' << format_double(row.scale, 6) << ',' << row.method << ','
         << s.name << ',' << format_double(s.psnr, 8) << ',' << format_double(s.ssim, 8)
         << '\n';
    os << row.dataset << ',' << format_double(row.scale, 6) << ',' << row.method << ",mean,"
       << format_double(row.mean_psnr, 8) << ',' << format_double(row.mean_ssim, 8) << '\n';
  }
  if (!os) throw IoError(IoErrorKind::kWriteFailed, "CSV write failed: " + path);
}

inline void write_density_csv(const std::string& path, const std::vector<DensityPoint>& pts) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(IoErrorKind::kWriteFailed, "cannot write " + path);
  os << "L,scale,psnr\n";
  for (const DensityPoint& p : pts)
    os << p.level_count << ',' << format_double(p.scale, 6) << ','
       << format_double(p.psnr, 8) << '\n';
  if (!os) throw IoError(IoErrorKind::kWriteFailed, "CSV write failed: " + path);
}

}  // namespace anysr
