// test_pipeline.cpp : dataset building/caching, batch sampling, learning-rate
// schedule, training determinism and resume
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
#include <filesystem>
#include <fstream>
#include <numeric>

#include "anysr/metrics.hpp"
#include "anysr/pipeline.hpp"
#include "support/synth.hpp"
#include "support/tmpdir.hpp"

using namespace anysr;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)), {});
}

TrainConfig tiny_train(const std::string& data, const std::string& out) {
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.patch_size = 16;
  cfg.total_updates = 50;
  cfg.initial_lr = 1e-3;
  cfg.lr_half_period = 1000;
  cfg.seed = 7;
  cfg.dataset_dir = data;
  cfg.output_dir = out;
  cfg.model.num_blocks = 1;
  cfg.model.dense_layers = 1;
  cfg.model.base_channels = 8;
  cfg.model.growth_channels = 8;
  cfg.model.ca_reduction = 4;
  cfg.model.level_count = 11;
  cfg.model.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("learning-rate schedule", "[pipeline]") {
  TrainConfig cfg;  // paper defaults: 1e-4 halved every 2e5
  CHECK(lr_at(cfg, 0) == 1e-4);
  CHECK(lr_at(cfg, 199999) == 1e-4);
  CHECK(lr_at(cfg, 200000) == 5e-5);
  CHECK(lr_at(cfg, 450000) == 2.5e-5);
  CHECK_THROWS_AS(lr_at(cfg, -1), InvalidArgument);
}

TEST_CASE("dataset building and caching", "[pipeline]") {
  const std::string dir = testsupport::scratch_dir("ds_build");
  const std::string cache = dir + "/cache";
  testsupport::write_synth_corpus(dir, 1, 64, 64, 5);

  SECTION("one image and a 2-level grid give two LR sets") {
    const ScaleDataset ds = build_dataset(dir, level_scales(2), 32, cache);
    REQUIRE(ds.entries.size() == 1);
    CHECK(ds.entries[0].lr.size() == 2);
    CHECK(ds.entries[0].lr[0].data() == ds.entries[0].hr.data());  // identity level
    CHECK(ds.entries[0].lr[1].height() == 32);
    CHECK(ds.entries[0].ref_hw[1] == std::pair<int, int>(64, 64));
  }

  SECTION("cache regeneration is byte-identical") {
    build_dataset(dir, level_scales(3), 32, cache);
    std::map<std::string, std::string> first;
    for (const auto& e : fs::directory_iterator(cache))
      first[e.path().filename().string()] = read_file(e.path().string());
    REQUIRE(first.size() == 2);  // levels 1..2 cached, identity level is not

    fs::remove_all(cache);
    build_dataset(dir, level_scales(3), 32, cache);
    for (const auto& e : fs::directory_iterator(cache))
      CHECK(read_file(e.path().string()) == first[e.path().filename().string()]);

    // a third build reuses the cache and must agree with a fresh compute
    const ScaleDataset cached = build_dataset(dir, level_scales(3), 32, cache);
    const ScaleDataset fresh = build_dataset(dir, level_scales(3), 32, "");
    for (int l = 0; l < 3; ++l)
      CHECK(cached.entries[0].lr[l].data() == fresh.entries[0].lr[l].data());
  }

  SECTION("degrade size rule: 97x53 at scale 1.7 gives 57x31") {
    const std::string dir2 = testsupport::scratch_dir("ds_size");
    save_image(testsupport::synth_image(97, 53, 2), dir2 + "/img.png");
    const ScaleDataset ds = build_dataset(dir2, level_scales(11), 16, "");
    const int l17 = 7;  // scale 1.7 on the 11-level grid
    REQUIRE(ds.grid.scales[l17] == Catch::Approx(1.7).margin(1e-12));
    CHECK(ds.entries[0].lr[l17].height() == 57);
    CHECK(ds.entries[0].lr[l17].width() == 31);
  }

  SECTION("small images are skipped; an empty result errors") {
    const std::string dir3 = testsupport::scratch_dir("ds_small");
    save_image(testsupport::synth_image(20, 20, 1), dir3 + "/small.png");
    save_image(testsupport::synth_image(64, 64, 2), dir3 + "/ok.png");
    const ScaleDataset ds = build_dataset(dir3, level_scales(2), 32, "");
    CHECK(ds.entries.size() == 1);
    CHECK(ds.entries[0].name == "ok");

    const std::string dir4 = testsupport::scratch_dir("ds_allsmall");
    save_image(testsupport::synth_image(20, 20, 1), dir4 + "/small.png");
    CHECK_THROWS_AS(build_dataset(dir4, level_scales(2), 32, ""), IoError);
    CHECK_THROWS_AS(build_dataset(dir4 + "/nope", level_scales(2), 32, ""), IoError);
  }
}

TEST_CASE("batch sampling", "[pipeline]") {
  const std::string dir = testsupport::scratch_dir("ds_sample");
  testsupport::write_synth_corpus(dir, 3, 64, 64, 11);
  const ScaleDataset ds = build_dataset(dir, level_scales(11), 32, "");

  SECTION("deterministic given the stream") {
    Rng r1 = Rng::stream(9, 4), r2 = Rng::stream(9, 4);
    const Batch a = sample_batch(ds, 16, 4, r1);
    const Batch b = sample_batch(ds, 16, 4, r2);
    CHECK(a.level == b.level);
    for (int i = 0; i < 4; ++i) {
      CHECK(a.pairs[i].input.data() == b.pairs[i].input.data());
      CHECK(a.pairs[i].target.data() == b.pairs[i].target.data());
    }
  }

  SECTION("one scale per batch and aligned pairs") {
    EvalProtocol rgb;
    rgb.channel = MetricChannel::kRgb;
    rgb.border_shave = 0;
    Rng rng(42);
    std::vector<double> level_psnr(11, 0.0);
    std::vector<int> level_hits(11, 0);
    for (int step = 0; step < 300; ++step) {
      const Batch batch = sample_batch(ds, 16, 2, rng);
      for (const PatchPair& p : batch.pairs) {
        CHECK(p.scale == ds.grid.scales[batch.level]);
        CHECK(p.input.height() == 16);
        CHECK(p.target.height() == 16);
        const double v = psnr(p.input, p.target, rgb);
        level_psnr[batch.level] += std::isinf(v) ? 100.0 : v;
        level_hits[batch.level]++;
      }
    }
    for (int l = 0; l < 11; ++l) {
      REQUIRE(level_hits[l] > 0);
      const double mean = level_psnr[l] / level_hits[l];
      INFO("level " << l << " mean psnr " << mean);
      // misaligned pairs would fall well below bicubic quality
      CHECK(mean > 18.0);
    }
    // the identity level reproduces the target exactly
    Rng r0(1);
    for (;;) {
      const Batch b0 = sample_batch(ds, 16, 1, r0);
      if (b0.level != 0) continue;
      CHECK(b0.pairs[0].input.data() == b0.pairs[0].target.data());
      break;
    }
  }

  SECTION("levels are drawn uniformly") {
    Rng rng(999);
    std::vector<int> hits(11, 0);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) hits[sample_batch(ds, 16, 1, rng).level]++;
    const double expect = draws / 11.0;
    const double sigma = std::sqrt(draws * (1.0 / 11.0) * (10.0 / 11.0));
    for (int l = 0; l < 11; ++l) {
      INFO("level " << l << " hits " << hits[l]);
      CHECK(std::fabs(hits[l] - expect) < 3.0 * sigma);
    }
  }

  SECTION("oversized patches error") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_batch(ds, 64, 1, rng), InvalidArgument);
  }
}

TEST_CASE("training runs, logs, and improves on a toy set", "[pipeline]") {
  const std::string data = testsupport::scratch_dir("train_data");
  testsupport::write_synth_corpus(data, 4, 64, 64, 23);
  const std::string out = testsupport::scratch_dir("train_out");
  const TrainConfig cfg = tiny_train(data, out);

  const TrainResult result = train(cfg);
  CHECK(result.steps_run == 50);
  REQUIRE(fs::exists(result.final_checkpoint));
  REQUIRE(fs::exists(result.log_path));

  SECTION("loss trends down") {
    const double first = std::accumulate(result.losses.begin(), result.losses.begin() + 10, 0.0);
    const double last = std::accumulate(result.losses.end() - 10, result.losses.end(), 0.0);
    INFO("first-10 sum " << first << ", last-10 sum " << last);
    CHECK(last < first);
  }

  SECTION("log format") {
    std::ifstream is(result.log_path);
    std::string header;
    std::getline(is, header);
    CHECK(header == "step,level,loss,lr");
    int rows = 0;
    std::string line;
    while (std::getline(is, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 50);
  }

  SECTION("identical seeds give identical logs and checkpoints") {
    const std::string out2 = testsupport::scratch_dir("train_out2");
    TrainConfig cfg2 = cfg;
    cfg2.output_dir = out2;
    train(cfg2);
    CHECK(read_file(out2 + "/train_log.csv") == read_file(out + "/train_log.csv"));
    CHECK(read_file(out2 + "/checkpoint_final.ckpt") ==
          read_file(out + "/checkpoint_final.ckpt"));
  }
}

TEST_CASE("resumed training matches a straight run bitwise", "[pipeline]") {
  const std::string data = testsupport::scratch_dir("resume_data");
  testsupport::write_synth_corpus(data, 3, 64, 64, 31);

  const std::string straight_dir = testsupport::scratch_dir("resume_straight");
  TrainConfig straight = tiny_train(data, straight_dir);
  straight.total_updates = 24;
  train(straight);

  const std::string split_dir = testsupport::scratch_dir("resume_split");
  TrainConfig phase1 = tiny_train(data, split_dir);
  phase1.total_updates = 12;
  const TrainResult mid = train(phase1);

  TrainConfig phase2 = phase1;
  phase2.total_updates = 24;
  train(phase2, mid.final_checkpoint);

  CHECK(read_file(split_dir + "/checkpoint_final.ckpt") ==
        read_file(straight_dir + "/checkpoint_final.ckpt"));
  CHECK(read_file(split_dir + "/train_log.csv") ==
        read_file(straight_dir + "/train_log.csv"));

  SECTION("architecture mismatch on resume is rejected") {
    TrainConfig other = phase2;
    other.model.base_channels = 16;
    other.model.ca_reduction = 4;
    CHECK_THROWS_AS(train(other, mid.final_checkpoint), InvalidArgument);
  }
}

TEST_CASE("zero updates yields the initialization checkpoint", "[pipeline]") {
  const std::string data = testsupport::scratch_dir("zero_data");
  testsupport::write_synth_corpus(data, 1, 64, 64, 3);
  const std::string out = testsupport::scratch_dir("zero_out");
  TrainConfig cfg = tiny_train(data, out);
  cfg.total_updates = 0;
  const TrainResult result = train(cfg);
  CHECK(result.steps_run == 0);

  auto [loaded, info] = load_checkpoint(result.final_checkpoint);
  Network<float> fresh(cfg.model);
  auto a = loaded.parameters();
  auto b = fresh.parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->value.data == b[i]->value.data);
}

TEST_CASE("config files mirror TrainConfig fields", "[pipeline]") {
  const std::string dir = testsupport::scratch_dir("config");
  {
    std::ofstream os(dir + "/train.cfg");
    os << "# toy configuration\n"
       << "batch_size = 4\n"
       << "patch_size=24\n"
       << "initial_lr = 0.0005\n"
       << "total_updates = 123\n"
       << "seed=99\n"
       << "dataset_dir = some/dir\n"
       << "num_blocks = 3\n"
       << "ca_enabled = 0\n";
  }
  const TrainConfig cfg = load_train_config(dir + "/train.cfg");
  CHECK(cfg.batch_size == 4);
  CHECK(cfg.patch_size == 24);
  CHECK(cfg.initial_lr == 0.0005);
  CHECK(cfg.total_updates == 123);
  CHECK(cfg.seed == 99);
  CHECK(cfg.dataset_dir == "some/dir");
  CHECK(cfg.model.num_blocks == 3);
  CHECK_FALSE(cfg.model.ca_enabled);

  // flags override file values by applying later
  TrainConfig overridden = cfg;
  apply_config_kv(overridden, "batch_size", "16");
  CHECK(overridden.batch_size == 16);

  {
    std::ofstream os(dir + "/bad.cfg");
    os << "no_such_key = 1\n";
  }
  CHECK_THROWS_AS(load_train_config(dir + "/bad.cfg"), InvalidArgument);
  CHECK_THROWS_AS(load_train_config(dir + "/missing.cfg"), IoError);
}
