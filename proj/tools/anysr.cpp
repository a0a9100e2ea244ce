// anysr.cpp : command-line front end — upscaling, dataset degradation,
// training, evaluation, strategy benchmarks, studies, self checks
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

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anysr/eval.hpp"
#include "anysr/levels.hpp"
#include "anysr/metrics.hpp"
#include "anysr/network.hpp"
#include "anysr/pipeline.hpp"
#include "anysr/png_io.hpp"
#include "anysr/resample.hpp"
#include "anysr/schedule.hpp"
#include "anysr/selfcheck.hpp"
#include "anysr/svg_plot.hpp"

namespace {

using namespace anysr;

EvalProtocol make_protocol(const std::string& name, double scale) {
  if (name == "luma-shave") return EvalProtocol::for_scale(scale, MetricChannel::kLuma);
  if (name == "rgb-full") {
    EvalProtocol p;
    p.channel = MetricChannel::kRgb;
    p.border_shave = 0;
    return p;
  }
  throw InvalidArgument("unknown protocol: " + name + " (use luma-shave or rgb-full)");
}

std::vector<double> parse_ratio_list(const std::string& spec) {
  std::vector<double> out;
  std::size_t at = 0;
  while (at <= spec.size()) {
    const std::size_t comma = spec.find(',', at);
    const std::string tok = spec.substr(at, comma == std::string::npos ? spec.size() - at
                                                                       : comma - at);
    if (!tok.empty()) out.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    at = comma + 1;
  }
  if (out.empty()) throw InvalidArgument("empty ratio list: " + spec);
  return out;
}

std::vector<double> parse_scale_sweep(const std::string& spec) {
  // "lo:hi:step" or a comma list
  const std::size_t c1 = spec.find(':');
  if (c1 == std::string::npos) return parse_ratio_list(spec);
  const std::size_t c2 = spec.find(':', c1 + 1);
  if (c2 == std::string::npos) throw InvalidArgument("scale sweep must be lo:hi:step");
  const double lo = std::stod(spec.substr(0, c1));
  const double hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
  const double step = std::stod(spec.substr(c2 + 1));
  if (step <= 0 || hi < lo) throw InvalidArgument("bad scale sweep: " + spec);
  std::vector<double> out;
  for (double s = lo; s <= hi + 1e-12; s += step) out.push_back(s);
  return out;
}

void print_row(const EvalRow& row) {
  std::printf("%s x%s [%s]: PSNR %s dB, SSIM %s (%zu images)\n", row.dataset.c_str(),
              format_double(row.scale, 6).c_str(), row.method.c_str(),
              format_double(row.mean_psnr, 6).c_str(), format_double(row.mean_ssim, 6).c_str(),
              row.images.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anysr: arbitrary-scale image super-resolution toolkit"};
  app.require_subcommand(1);

  // --- upscale -------------------------------------------------------------
  auto* up = app.add_subcommand("upscale", "Super-resolve one PNG to any decimal scale");
  std::string up_in, up_out, up_model;
  double up_scale = 2.0;
  bool up_bicubic = false;
  up->add_option("--scale", up_scale, "target scale factor")->required();
  up->add_option("--in", up_in, "input PNG")->required();
  up->add_option("--out", up_out, "output PNG")->required();
  up->add_option("--model", up_model, "checkpoint file");
  up->add_flag("--bicubic", up_bicubic, "plain bicubic resize, no model");

  // --- degrade ---------------------------------------------------------------
  auto* deg = app.add_subcommand("degrade", "Produce the benchmark LR (and reference) images");
  std::string deg_in, deg_out, deg_ref;
  double deg_scale = 2.0;
  deg->add_option("--scale", deg_scale, "downscale factor (> 1)")->required();
  deg->add_option("--in", deg_in, "HR input PNG")->required();
  deg->add_option("--out", deg_out, "LR output PNG")->required();
  deg->add_option("--ref", deg_ref, "also write the cropped HR reference here");

  // --- train -----------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "Train a model on a directory of PNGs");
  std::string tr_config, tr_resume;
  TrainConfig tr_cfg = TrainConfig::desk();
  bool tr_no_ca = false, tr_no_sa = false, tr_no_sc = false;
  long long tr_seed = -1, tr_updates = -1, tr_batch = -1, tr_patch = -1, tr_every = -1;
  long long tr_blocks = -1, tr_dense = -1, tr_channels = -1, tr_growth = -1, tr_levels = -1;
  double tr_lr = -1;
  std::string tr_data, tr_out;
  tr->add_option("--config", tr_config, "key=value config file (flags override)");
  tr->add_option("--data", tr_data, "training image directory");
  tr->add_option("--out", tr_out, "output directory (checkpoints, log, LR cache)");
  tr->add_option("--updates", tr_updates, "total minibatch updates");
  tr->add_option("--seed", tr_seed, "training seed");
  tr->add_option("--batch-size", tr_batch, "patches per update");
  tr->add_option("--patch-size", tr_patch, "square patch size");
  tr->add_option("--lr", tr_lr, "initial learning rate");
  tr->add_option("--checkpoint-every", tr_every, "save a checkpoint every N updates");
  tr->add_option("--blocks", tr_blocks, "dense attention blocks");
  tr->add_option("--dense-layers", tr_dense, "dense layers per block");
  tr->add_option("--channels", tr_channels, "trunk width");
  tr->add_option("--growth", tr_growth, "dense layer growth channels");
  tr->add_option("--levels", tr_levels, "pyramid level count");
  tr->add_flag("--no-ca", tr_no_ca, "disable channel attention");
  tr->add_flag("--no-sa", tr_no_sa, "disable spatial attention");
  tr->add_flag("--no-sc", tr_no_sc, "disable the input skip connection");
  tr->add_option("--resume", tr_resume, "resume from a checkpoint");

  // --- eval ------------------------------------------------------------------
  auto* ev = app.add_subcommand("eval", "Evaluate PSNR/SSIM over a dataset directory");
  std::string ev_dataset, ev_model, ev_protocol = "luma-shave", ev_csv;
  double ev_scale = 2.0;
  bool ev_bicubic = false;
  ev->add_option("--dataset", ev_dataset, "directory of HR PNGs")->required();
  ev->add_option("--scale", ev_scale, "scale factor (> 1)")->required();
  ev->add_option("--model", ev_model, "checkpoint file");
  ev->add_flag("--bicubic", ev_bicubic, "evaluate the bicubic baseline");
  ev->add_option("--protocol", ev_protocol, "luma-shave (default) or rgb-full");
  ev->add_option("--out-csv", ev_csv, "write per-image results as CSV");

  // --- bench-strategies --------------------------------------------------------
  auto* bs = app.add_subcommand("bench-strategies",
                                "Compare recursion strategies for one target scale");
  std::string bs_dataset, bs_model, bs_protocol = "luma-shave", bs_csv;
  double bs_scale = 3.0;
  std::vector<std::string> bs_strategies;
  bs->add_option("--dataset", bs_dataset, "directory of HR PNGs")->required();
  bs->add_option("--scale", bs_scale, "target scale factor")->required();
  bs->add_option("--model", bs_model, "checkpoint file")->required();
  bs->add_option("--strategy", bs_strategies,
                 "comma list of per-recursion ratios, repeatable (default: standard set)");
  bs->add_option("--protocol", bs_protocol, "luma-shave (default) or rgb-full");
  bs->add_option("--out-csv", bs_csv, "write rows as CSV");

  // --- density-study -----------------------------------------------------------
  auto* den = app.add_subcommand("density-study",
                                 "PSNR-vs-scale curves for checkpoints with different grids");
  std::string den_dataset, den_csv, den_svg, den_protocol = "luma-shave";
  std::vector<std::string> den_models;
  std::string den_scales = "1.05:1.95:0.05";
  den->add_option("--dataset", den_dataset, "directory of HR PNGs")->required();
  den->add_option("--model", den_models, "checkpoint file, repeatable")->required();
  den->add_option("--scales", den_scales, "sweep as lo:hi:step or a comma list");
  den->add_option("--out-csv", den_csv, "CSV output path");
  den->add_option("--out-svg", den_svg, "SVG plot output path");
  den->add_option("--protocol", den_protocol, "luma-shave (default) or rgb-full");

  // --- gradcheck / selftest ------------------------------------------------------
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  double gc_tol = 1e-4;
  gc->add_option("--tolerance", gc_tol, "max relative error allowed");
  auto* st = app.add_subcommand("selftest", "Quick built-in invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*up) {
      const Image in = load_image(up_in);
      Image out;
      if (up_bicubic) {
        out = resize(in, up_scale);
      } else {
        if (up_model.empty())
          throw InvalidArgument("upscale: provide --model or use --bicubic");
        if (!(up_scale > 1.0))
          throw InvalidArgument("upscale: the model path needs a scale > 1");
        auto [net, info] = load_checkpoint(up_model);
        NetworkPredictor predictor(net);
        out = up_scale <= 2.0 ? reconstruct(up_scale, in, predictor)
                              : execute_plan(make_plan(up_scale), in, predictor);
      }
      save_image(out, up_out);
      std::printf("%s: %dx%d -> %s: %dx%d\n", up_in.c_str(), in.width(), in.height(),
                  up_out.c_str(), out.width(), out.height());
    } else if (*deg) {
      const Image hr = load_image(deg_in);
      auto [lr, ref] = degrade_pair(hr, deg_scale);
      save_image(lr, deg_out);
      if (!deg_ref.empty()) save_image(ref, deg_ref);
      std::printf("%s: %dx%d -> LR %dx%d (reference %dx%d)\n", deg_in.c_str(), hr.width(),
                  hr.height(), lr.width(), lr.height(), ref.width(), ref.height());
    } else if (*tr) {
      TrainConfig cfg = tr_config.empty() ? tr_cfg : load_train_config(tr_config, tr_cfg);
      if (!tr_data.empty()) cfg.dataset_dir = tr_data;
      if (!tr_out.empty()) cfg.output_dir = tr_out;
      if (tr_updates >= 0) cfg.total_updates = tr_updates;
      if (tr_seed >= 0) cfg.seed = static_cast<std::uint64_t>(tr_seed);
      if (tr_batch > 0) cfg.batch_size = static_cast<int>(tr_batch);
      if (tr_patch > 0) cfg.patch_size = static_cast<int>(tr_patch);
      if (tr_lr > 0) cfg.initial_lr = tr_lr;
      if (tr_every >= 0) cfg.checkpoint_every = tr_every;
      if (tr_blocks > 0) cfg.model.num_blocks = static_cast<int>(tr_blocks);
      if (tr_dense > 0) cfg.model.dense_layers = static_cast<int>(tr_dense);
      if (tr_channels > 0) cfg.model.base_channels = static_cast<int>(tr_channels);
      if (tr_growth > 0) cfg.model.growth_channels = static_cast<int>(tr_growth);
      if (tr_levels > 0) cfg.model.level_count = static_cast<int>(tr_levels);
      if (tr_no_ca) cfg.model.ca_enabled = false;
      if (tr_no_sa) cfg.model.sa_enabled = false;
      if (tr_no_sc) cfg.model.sc_enabled = false;
      if (cfg.dataset_dir.empty()) throw InvalidArgument("train: --data (or config) is required");
      const TrainResult result = train(cfg, tr_resume);
      std::printf("trained %lld updates; checkpoint: %s; log: %s\n",
                  result.steps_run, result.final_checkpoint.c_str(), result.log_path.c_str());
    } else if (*ev) {
      if (!ev_bicubic && ev_model.empty())
        throw InvalidArgument("eval: provide --model or --bicubic");
      const EvalProtocol protocol = make_protocol(ev_protocol, ev_scale);
      EvalRow row;
      if (ev_bicubic) {
        row = eval_bicubic(ev_dataset, ev_scale, protocol);
      } else {
        auto [net, info] = load_checkpoint(ev_model);
        row = eval_model(ev_dataset, ev_scale, net, protocol);
      }
      print_row(row);
      if (!ev_csv.empty()) write_eval_csv(ev_csv, {row});
    } else if (*bs) {
      auto [net, info] = load_checkpoint(bs_model);
      std::vector<UpscalePlan> plans;
      if (bs_strategies.empty()) {
        plans.push_back(make_plan(bs_scale));
        for (int n = 2; n <= 3; ++n)
          if (std::pow(bs_scale, 1.0 / n) <= 2.0) plans.push_back(make_equal_plan(bs_scale, n));
      } else {
        for (const std::string& s : bs_strategies)
          plans.push_back(make_custom_plan(parse_ratio_list(s)));
      }
      const EvalProtocol protocol = make_protocol(bs_protocol, bs_scale);
      const std::vector<EvalRow> rows = bench_strategies(bs_dataset, bs_scale, net, plans,
                                                         protocol);
      for (const EvalRow& row : rows) print_row(row);
      if (!bs_csv.empty()) write_eval_csv(bs_csv, rows);
    } else if (*den) {
      std::vector<std::pair<Network<float>, CheckpointInfo>> loaded;
      loaded.reserve(den_models.size());
      for (const std::string& path : den_models) loaded.push_back(load_checkpoint(path));
      std::vector<const Network<float>*> nets;
      for (auto& [net, info] : loaded) nets.push_back(&net);
      const std::vector<double> sweep = parse_scale_sweep(den_scales);
      const EvalProtocol protocol = make_protocol(den_protocol, 2.0);
      const std::vector<DensityPoint> points = density_study(den_dataset, nets, sweep,
                                                             protocol);
      for (const DensityPoint& p : points)
        std::printf("L=%d x%s: %s dB\n", p.level_count, format_double(p.scale, 4).c_str(),
                    format_double(p.psnr, 6).c_str());
      if (!den_csv.empty()) write_density_csv(den_csv, points);
      if (!den_svg.empty()) {
        std::vector<PlotSeries> series;
        for (const Network<float>* net : nets) {
          PlotSeries s;
          s.label = "L=" + std::to_string(net->config().level_count);
          for (const DensityPoint& p : points)
            if (p.level_count == net->config().level_count) s.points.push_back({p.scale, p.psnr});
          series.push_back(std::move(s));
        }
        write_svg_lines(den_svg, "PSNR vs scale", "scale", "PSNR (dB)", series);
      }
    } else if (*gc) {
      bool ok = true;
      for (const GradCheckCase& c : gradcheck_suite()) {
        const bool pass = c.report.max_rel_error <= gc_tol;
        ok = ok && pass;
        std::printf("%-24s max rel error %-12s (%zu samples)  %s\n", c.name.c_str(),
                    format_double(c.report.max_rel_error, 4).c_str(), c.report.samples,
                    pass ? "ok" : "FAIL");
      }
      return ok ? 0 : 1;
    } else if (*st) {
      bool ok = true;
      for (const SelfTestCase& c : selftest_suite()) {
        ok = ok && c.pass;
        std::printf("%-24s %s\n", c.name.c_str(), c.pass ? "ok" : "FAIL");
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
