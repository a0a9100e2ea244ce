// pipeline.hpp : dataset preparation, batch sampling across the level grid,
// learning-rate schedule, and the deterministic training loop
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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "anysr/common.hpp"
#include "anysr/image.hpp"
#include "anysr/levels.hpp"
#include "anysr/network.hpp"
#include "anysr/png_io.hpp"
#include "anysr/resample.hpp"

namespace anysr {

struct TrainConfig {
  int batch_size = 16;
  int patch_size = 48;
  double initial_lr = 1e-4;
  long long lr_half_period = 200000;
  long long total_updates = 1000000;
  std::uint64_t seed = 0;
  long long checkpoint_every = 0;  // 0: only the final checkpoint
  std::string dataset_dir;
  std::string output_dir = ".";
  ModelConfig model;

  void validate() const {
    if (patch_size < 8) throw InvalidArgument("TrainConfig: patch_size must be >= 8");
    if (batch_size < 1) throw InvalidArgument("TrainConfig: batch_size must be >= 1");
    if (lr_half_period < 1) throw InvalidArgument("TrainConfig: lr_half_period must be >= 1");
    if (total_updates < 0) throw InvalidArgument("TrainConfig: total_updates must be >= 0");
    model.validate();
  }

  static TrainConfig desk() {
    TrainConfig c;
    c.batch_size = 8;
    c.patch_size = 32;
    c.total_updates = 2000;
    c.initial_lr = 1e-3;
    c.lr_half_period = 350;
    c.model = ModelConfig::desk();
    return c;
  }
};

// initial_lr halved once per full period elapsed.
inline double lr_at(const TrainConfig& cfg, long long step) {
  if (step < 0) throw InvalidArgument("lr_at: negative step");
  return std::ldexp(cfg.initial_lr, -static_cast<int>(step / cfg.lr_half_period));
}

// One training image with its per-level degraded copies. LR images carry
// 8-bit quantized values (they round-trip through the PNG cache); level 0
// is the identity pair, LR == HR.
struct DatasetEntry {
  std::string name;
  Image hr;
  std::vector<Image> lr;                     // per level
  std::vector<std::pair<int, int>> ref_hw;   // usable HR extent per level
};

struct ScaleDataset {
  LevelGrid grid;
  int min_dim = 0;  // smallest usable patch extent across entries/levels
  std::vector<DatasetEntry> entries;
};

namespace detail {

inline Image quantize_roundtrip(const Image& img) {
  Image out = img;
  // same expression as the PNG loader so cached and fresh values are bitwise equal
  for (float& v : out.data()) v = static_cast<float>(quantize_u8(v)) * (1.0f / 255.0f);
  return out;
}

}  // namespace detail

// Loads every PNG in dir (sorted by name) and degrades it once per grid
// scale. Images smaller than min_hr_dim per axis are skipped with a warning.
// When cache_dir is given, LR images are written there as PNGs on first use
// and reused afterwards; regeneration is byte-identical.
inline ScaleDataset build_dataset(const std::string& dir, const LevelGrid& grid,
                                  int min_hr_dim, const std::string& cache_dir = "") {
  namespace fs = std::filesystem;
  const std::vector<std::string> names = list_png_files(dir);
  if (names.empty())
    throw IoError(IoErrorKind::kMissingFile, dir + " contains no PNG images");
  if (!cache_dir.empty()) fs::create_directories(cache_dir);

  ScaleDataset ds;
  ds.grid = grid;
  ds.min_dim = 0;
  for (const std::string& name : names) {
    Image hr = load_image(dir + "/" + name);
    if (std::min(hr.height(), hr.width()) < min_hr_dim) {
      std::fprintf(stderr, "warning: skipping %s (smaller than %d px)\n", name.c_str(),
                   min_hr_dim);
      continue;
    }
    DatasetEntry entry;
    entry.name = fs::path(name).stem().string();
    entry.hr = std::move(hr);
    for (int l = 0; l < grid.level_count; ++l) {
      const double scale = grid.scales[l];
      if (l == 0) {
        entry.lr.push_back(entry.hr);
        entry.ref_hw.emplace_back(entry.hr.height(), entry.hr.width());
        continue;
      }
      const std::string cache_path =
          cache_dir.empty() ? ""
                            : cache_dir + "/" + entry.name + "_l" + std::to_string(l) + ".png";
      Image lr;
      if (!cache_path.empty() && fs::exists(cache_path)) {
        lr = load_image(cache_path);
      } else {
        lr = detail::quantize_roundtrip(degrade_pair(entry.hr, scale).first);
        if (!cache_path.empty()) save_image(lr, cache_path);
      }
      entry.ref_hw.emplace_back(static_cast<int>(std::ceil(lr.height() * scale)),
                                static_cast<int>(std::ceil(lr.width() * scale)));
      entry.lr.push_back(std::move(lr));
    }
    ds.entries.push_back(std::move(entry));
  }
  if (ds.entries.empty())
    throw IoError(IoErrorKind::kMissingFile,
                  dir + ": every image was smaller than the required size");
  ds.min_dim = std::numeric_limits<int>::max();
  for (const DatasetEntry& e : ds.entries)
    for (const auto& [h, w] : e.ref_hw) ds.min_dim = std::min({ds.min_dim, h, w});
  return ds;
}

struct Batch {
  int level = 0;
  std::vector<PatchPair> pairs;
};

// Draws one level uniformly, then patch pairs uniformly over images and
// positions. The input patch is the bicubic interpolation of the cached LR
// restricted to the sampled window, so it equals the same crop of a
// full-image interpolation; the target is the HR crop at the same
// coordinates — the pair is exactly aligned.
inline Batch sample_batch(const ScaleDataset& ds, int patch, int batch_size, Rng& rng) {
  if (ds.entries.empty()) throw InvalidArgument("sample_batch: empty dataset");
  if (ds.min_dim < patch)
    throw InvalidArgument("sample_batch: patch larger than a usable LR image");
  Batch batch;
  batch.level = static_cast<int>(rng.bounded(ds.grid.level_count));
  const double scale = ds.grid.scales[batch.level];
  for (int b = 0; b < batch_size; ++b) {
    const DatasetEntry& e = ds.entries[rng.bounded(ds.entries.size())];
    const auto [ref_h, ref_w] = e.ref_hw[batch.level];
    const int x = static_cast<int>(rng.bounded(ref_w - patch + 1));
    const int y = static_cast<int>(rng.bounded(ref_h - patch + 1));
    PatchPair pair;
    pair.scale = scale;
    pair.target = crop(e.hr, x, y, patch, patch);
    pair.input = batch.level == 0
                     ? crop(e.hr, x, y, patch, patch)
                     : resize_window(e.lr[batch.level], scale, x, y, patch, patch);
    batch.pairs.push_back(augment(pair, rng));
  }
  return batch;
}

class TrainingError : public std::runtime_error {
 public:
  TrainingError(long long step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  long long step() const { return step_; }

 private:
  long long step_;
};

struct TrainResult {
  std::string final_checkpoint;
  std::string log_path;
  long long steps_run = 0;
  std::vector<double> losses;  // one entry per update executed in this run
};

namespace detail {

template <typename T>
Tensor4<T> stack_images(const std::vector<PatchPair>& pairs, bool targets) {
  const Image& first = targets ? pairs[0].target : pairs[0].input;
  Tensor4<T> t(static_cast<int>(pairs.size()), first.channels(), first.height(),
               first.width());
  for (std::size_t b = 0; b < pairs.size(); ++b) {
    const Image& img = targets ? pairs[b].target : pairs[b].input;
    std::copy(img.data().begin(), img.data().end(),
              t.data.begin() + static_cast<std::ptrdiff_t>(b * img.size()));
  }
  return t;
}

}  // namespace detail

// The training loop. Each update samples one level, runs the trunk plus that
// level's head only, applies L1 + Adam, and appends a `step,level,loss,lr`
// row to the log. Fully deterministic given the seed: the sampling stream is
// derived from (seed, step), so resuming from a checkpoint at step k
// reproduces a straight run bitwise from step k onward.
inline TrainResult train(const TrainConfig& cfg, const std::string& resume_from = "") {
  namespace fs = std::filesystem;
  cfg.validate();
  fs::create_directories(cfg.output_dir);

  const LevelGrid grid = level_scales(cfg.model.level_count);
  ScaleDataset ds = build_dataset(cfg.dataset_dir, grid, 2 * cfg.patch_size,
                                  cfg.output_dir + "/lr_cache");
  if (ds.min_dim < cfg.patch_size)
    throw InvalidArgument("train: dataset images too small for the patch size");

  Network<float> model(cfg.model);
  long long start_step = 0;
  if (!resume_from.empty()) {
    auto [loaded, info] = load_checkpoint(resume_from);
    if (!same_architecture(info.config, cfg.model))
      throw InvalidArgument("train: resume checkpoint does not match the configuration");
    model = std::move(loaded);
    start_step = info.step;
  }
  std::vector<Parameter<float>*> params = model.parameters();

  TrainResult result;
  result.log_path = cfg.output_dir + "/train_log.csv";
  std::ofstream log(result.log_path, start_step > 0 ? std::ios::app : std::ios::trunc);
  if (!log) throw IoError(IoErrorKind::kWriteFailed, "cannot write " + result.log_path);
  if (start_step == 0) log << "step,level,loss,lr\n";

  for (long long step = start_step; step < cfg.total_updates; ++step) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(step));
    Batch batch = sample_batch(ds, cfg.patch_size, cfg.batch_size, rng);

    Graph<float> g;
    const auto input = g.input(detail::stack_images<float>(batch.pairs, false));
    const Tensor4f target = detail::stack_images<float>(batch.pairs, true);
    const auto out = model.build_forward(g, input, {batch.level}).at(batch.level);
    auto [loss, grad] = nn::l1_loss(g.value(out), target);
    if (!std::isfinite(loss))
      throw TrainingError(step, "train: non-finite loss at step " + std::to_string(step));
    g.backward(out, grad);

    OptimizerConfig oc;
    oc.lr = lr_at(cfg, step);
    nn::adam_step(params, oc, step + 1);

    log << step << ',' << batch.level << ',' << format_double(loss) << ','
        << format_double(oc.lr) << '\n';
    result.losses.push_back(loss);
    ++result.steps_run;

    if (cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0 &&
        step + 1 < cfg.total_updates) {
      save_checkpoint(model, cfg.output_dir + "/checkpoint_" + std::to_string(step + 1) + ".ckpt",
                      step + 1, true);
    }
  }
  log.flush();

  result.final_checkpoint = cfg.output_dir + "/checkpoint_final.ckpt";
  save_checkpoint(model, result.final_checkpoint, cfg.total_updates, true);
  return result;
}

// key=value configuration lines mirroring the TrainConfig field names.
// Unknown keys are rejected; '#' starts a comment.
inline void apply_config_kv(TrainConfig& cfg, const std::string& key, const std::string& value) {
  auto as_ll = [&value, &key]() {
    try {
      return std::stoll(value);
    } catch (const std::exception&) {
      throw InvalidArgument("config: bad integer for " + key + ": " + value);
    }
  };
  auto as_d = [&value, &key]() {
    try {
      return std::stod(value);
    } catch (const std::exception&) {
      throw InvalidArgument("config: bad number for " + key + ": " + value);
    }
  };
  if (key == "batch_size") cfg.batch_size = static_cast<int>(as_ll());
  else if (key == "patch_size") cfg.patch_size = static_cast<int>(as_ll());
  else if (key == "initial_lr") cfg.initial_lr = as_d();
  else if (key == "lr_half_period") cfg.lr_half_period = as_ll();
  else if (key == "total_updates") cfg.total_updates = as_ll();
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_ll());
  else if (key == "checkpoint_every") cfg.checkpoint_every = as_ll();
  else if (key == "dataset_dir") cfg.dataset_dir = value;
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "num_blocks") cfg.model.num_blocks = static_cast<int>(as_ll());
  else if (key == "dense_layers") cfg.model.dense_layers = static_cast<int>(as_ll());
  else if (key == "base_channels") cfg.model.base_channels = static_cast<int>(as_ll());
  else if (key == "growth_channels") cfg.model.growth_channels = static_cast<int>(as_ll());
  else if (key == "level_count") cfg.model.level_count = static_cast<int>(as_ll());
  else if (key == "ca_enabled") cfg.model.ca_enabled = as_ll() != 0;
  else if (key == "sa_enabled") cfg.model.sa_enabled = as_ll() != 0;
  else if (key == "sc_enabled") cfg.model.sc_enabled = as_ll() != 0;
  else if (key == "ca_reduction") cfg.model.ca_reduction = static_cast<int>(as_ll());
  else if (key == "model_seed") cfg.model.seed = static_cast<std::uint64_t>(as_ll());
  else throw InvalidArgument("config: unknown key " + key);
}

inline TrainConfig load_train_config(const std::string& path, TrainConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw IoError(IoErrorKind::kMissingFile, "cannot open config " + path);
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config: expected key=value, got: " + line);
    apply_config_kv(base, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
  return base;
}

}  // namespace anysr
