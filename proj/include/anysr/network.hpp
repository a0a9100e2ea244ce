// network.hpp : the super-resolution network — a shared feature-mapping
// trunk of densely wired dense-attention blocks feeding one reconstruction
// head per pyramid level — plus parameter counting and checkpoint I/O
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

#include <bit>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "anysr/common.hpp"
#include "anysr/graph.hpp"
#include "anysr/tensor.hpp"

namespace anysr {

struct ModelConfig {
  int num_blocks = 16;       // dense attention blocks in the trunk
  int dense_layers = 8;      // 3x3 conv+ReLU layers per block
  int base_channels = 64;
  int growth_channels = 64;  // channels added by each dense layer
  int level_count = 11;      // reconstruction heads (pyramid levels)
  bool ca_enabled = true;
  bool sa_enabled = true;
  bool sc_enabled = true;
  int ca_reduction = 16;     // channel-attention bottleneck factor
  std::uint64_t seed = 0;

  void validate() const {
    if (num_blocks < 1 || dense_layers < 1 || base_channels < 1 || growth_channels < 1)
      throw InvalidArgument("ModelConfig: block/layer/channel counts must be positive");
    if (level_count < 2) throw InvalidArgument("ModelConfig: need at least 2 levels");
    if (ca_reduction < 1 || base_channels % ca_reduction != 0)
      throw InvalidArgument("ModelConfig: ca_reduction must divide base_channels");
  }

  // Small configuration that trains in minutes on a CPU.
  static ModelConfig desk() {
    ModelConfig c;
    c.num_blocks = 2;
    c.dense_layers = 2;
    c.base_channels = 16;
    c.growth_channels = 16;
    c.ca_reduction = 4;
    return c;
  }
};

// True when two configurations build byte-compatible parameter sets
// (everything except the init seed).
inline bool same_architecture(const ModelConfig& a, const ModelConfig& b) {
  return a.num_blocks == b.num_blocks && a.dense_layers == b.dense_layers &&
         a.base_channels == b.base_channels && a.growth_channels == b.growth_channels &&
         a.level_count == b.level_count && a.ca_enabled == b.ca_enabled &&
         a.sa_enabled == b.sa_enabled && a.sc_enabled == b.sc_enabled &&
         a.ca_reduction == b.ca_reduction;
}

// Exact parameter count of the built network, closed form.
inline long long param_count(const ModelConfig& cfg) {
  cfg.validate();
  const long long C = cfg.base_channels, G = cfg.growth_channels;
  const long long D = cfg.dense_layers, B = cfg.num_blocks;
  long long total = 9 * 3 * C + C;  // head conv 3->C
  for (long long b = 0; b < B; ++b) {
    total += (b + 1) * C * C + C;  // entry 1x1 compression
    for (long long d = 0; d < D; ++d) total += 9 * (C + d * G) * G + G;
    total += (C + D * G) * C + C;  // fuse 1x1 compression
    if (cfg.ca_enabled) {
      const long long R = C / cfg.ca_reduction;
      total += C * R + R + R * C + C;
    }
  }
  long long head = 9 * C * 3 + 3;  // restore conv C->3
  if (cfg.sa_enabled) head += 3 * 3 + 3 + 3 * 1 + 1;
  total += cfg.level_count * head;
  return total;
}

template <typename T>
class Network {
 public:
  using Id = typename Graph<T>::Id;

  explicit Network(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(cfg_.seed);
    const int C = cfg_.base_channels, G = cfg_.growth_channels;
    head_ = make_conv("head", 3, C, 3, rng);
    blocks_.resize(cfg_.num_blocks);
    for (int b = 0; b < cfg_.num_blocks; ++b) {
      Block& blk = blocks_[b];
      const std::string base = "block" + std::to_string(b);
      blk.entry = make_conv(base + ".entry", (b + 1) * C, C, 1, rng);
      for (int d = 0; d < cfg_.dense_layers; ++d)
        blk.dense.push_back(make_conv(base + ".dense" + std::to_string(d), C + d * G, G, 3, rng));
      blk.fuse = make_conv(base + ".fuse", C + cfg_.dense_layers * G, C, 1, rng);
      if (cfg_.ca_enabled) {
        const int R = C / cfg_.ca_reduction;
        blk.ca_reduce = make_conv(base + ".ca_reduce", C, R, 1, rng);
        blk.ca_expand = make_conv(base + ".ca_expand", R, C, 1, rng);
      }
    }
    heads_.resize(cfg_.level_count);
    for (int l = 0; l < cfg_.level_count; ++l) {
      Head& hd = heads_[l];
      const std::string base = "level" + std::to_string(l);
      hd.restore = make_conv(base + ".restore", C, 3, 3, rng);
      // The heads feed a residual added to the interpolated input; a damped
      // restore init keeps the untrained model within 0.2 of that input.
      for (T& v : hd.restore.w.value.data) v *= T(0.05);
      if (cfg_.sa_enabled) {
        hd.sa_reduce = make_conv(base + ".sa_reduce", 3, 3, 1, rng);
        hd.sa_gate = make_conv(base + ".sa_gate", 3, 1, 1, rng);
      }
    }
  }

  const ModelConfig& config() const { return cfg_; }

  // Deterministic enumeration order; also the checkpoint record order.
  std::vector<Parameter<T>*> parameters() {
    std::vector<Parameter<T>*> out;
    auto push = [&out](Conv& c) {
      out.push_back(&c.w);
      out.push_back(&c.b);
    };
    push(head_);
    for (Block& b : blocks_) {
      push(b.entry);
      for (Conv& d : b.dense) push(d);
      push(b.fuse);
      if (cfg_.ca_enabled) {
        push(b.ca_reduce);
        push(b.ca_expand);
      }
    }
    for (Head& h : heads_) {
      push(h.restore);
      if (cfg_.sa_enabled) {
        push(h.sa_reduce);
        push(h.sa_gate);
      }
    }
    return out;
  }

  // Parameters belonging to reconstruction head l (for isolation checks).
  std::vector<Parameter<T>*> head_parameters(int l) {
    std::vector<Parameter<T>*> out{&heads_[l].restore.w, &heads_[l].restore.b};
    if (cfg_.sa_enabled) {
      out.push_back(&heads_[l].sa_reduce.w);
      out.push_back(&heads_[l].sa_reduce.b);
      out.push_back(&heads_[l].sa_gate.w);
      out.push_back(&heads_[l].sa_gate.b);
    }
    return out;
  }

  // Appends the network to a tape: trunk once, then one output node per
  // requested level. x must be a 3-channel interpolated-LR batch.
  std::map<int, Id> build_forward(Graph<T>& g, Id x, const std::vector<int>& levels) {
    if (levels.empty()) throw InvalidArgument("forward: empty level set");
    for (int l : levels)
      if (l < 0 || l >= cfg_.level_count) throw InvalidArgument("forward: level out of range");
    if (g.value(x).c != 3) throw InvalidArgument("forward: input must have 3 channels");

    const Id h0 = g.conv2d(x, head_.w, head_.b, true);
    std::vector<Id> trunk_feats{h0};
    for (Block& blk : blocks_) {
      const Id xb = g.conv2d(cat(g, trunk_feats), blk.entry.w, blk.entry.b, true);
      std::vector<Id> dense_feats{xb};
      for (Conv& d : blk.dense)
        dense_feats.push_back(g.relu(g.conv2d(cat(g, dense_feats), d.w, d.b, true)));
      Id fused = g.conv2d(cat(g, dense_feats), blk.fuse.w, blk.fuse.b, true);
      if (cfg_.ca_enabled) {
        const Id pooled = g.global_avg_pool(fused);
        const Id gate = g.sigmoid(g.conv2d(
            g.relu(g.conv2d(pooled, blk.ca_reduce.w, blk.ca_reduce.b, true)),
            blk.ca_expand.w, blk.ca_expand.b, true));
        fused = g.mul(fused, gate);
      }
      trunk_feats.push_back(fused);
    }
    const Id trunk_out = trunk_feats.back();

    std::map<int, Id> outputs;
    for (int l : levels) {
      Head& hd = heads_[l];
      Id img = g.conv2d(trunk_out, hd.restore.w, hd.restore.b, true);
      if (cfg_.sa_enabled) {
        const Id mask = g.sigmoid(g.conv2d(
            g.relu(g.conv2d(img, hd.sa_reduce.w, hd.sa_reduce.b, true)),
            hd.sa_gate.w, hd.sa_gate.b, true));
        img = g.mul(img, mask);
      }
      if (cfg_.sc_enabled) img = g.add(img, x);
      outputs[l] = img;
    }
    return outputs;
  }

  // Inference entry: evaluates the trunk once and only the requested heads.
  // Safe for read-only concurrent use; no gradients are touched.
  std::map<int, Tensor4<T>> forward(const Tensor4<T>& x, const std::vector<int>& levels) const {
    Network<T>& self = const_cast<Network<T>&>(*this);
    Graph<T> g;
    const Id in = g.input(x);
    std::map<int, Id> ids = self.build_forward(g, in, levels);
    std::map<int, Tensor4<T>> out;
    for (auto& [l, id] : ids) out[l] = g.value(id);
    return out;
  }

 private:
  struct Conv {
    Parameter<T> w, b;
  };
  struct Block {
    Conv entry, fuse, ca_reduce, ca_expand;
    std::vector<Conv> dense;
  };
  struct Head {
    Conv restore, sa_reduce, sa_gate;
  };

  static Conv make_conv(const std::string& name, int cin, int cout, int k, Rng& rng) {
    Tensor4<T> w(cout, cin, k, k);
    nn::he_uniform_fill(w, cin * k * k, rng);
    return Conv{Parameter<T>(name + ".w", std::move(w)),
                Parameter<T>(name + ".b", Tensor4<T>(1, cout, 1, 1))};
  }

  static Id cat(Graph<T>& g, const std::vector<Id>& ids) {
    return ids.size() == 1 ? ids[0] : g.concat(ids);
  }

  ModelConfig cfg_;
  Conv head_;
  std::vector<Block> blocks_;
  std::vector<Head> heads_;
};

using NetworkF = Network<float>;

// ---------------------------------------------------------------------------
// Checkpoint format (little-endian throughout):
//   8-byte magic "ANYSRCKP", u32 version, u32 metadata length, metadata text
//   (config and step as key=value lines), then per-parameter records:
//   u32 name length, name bytes, u32 rank, u32 dims[rank], f32 data.
//   Optimizer moments, when saved, follow as records named "<name>#m"/"#v".

namespace detail {

constexpr char kCkptMagic[8] = {'A', 'N', 'Y', 'S', 'R', 'C', 'K', 'P'};
constexpr std::uint32_t kCkptVersion = 1;

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError(IoErrorKind::kCorruptData, "checkpoint: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }

inline float get_f32(std::istream& is) { return std::bit_cast<float>(get_u32(is)); }

inline void put_record(std::ostream& os, const std::string& name, const Tensor4<float>& t) {
  put_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(os, 4);
  for (int d : {t.n, t.c, t.h, t.w}) put_u32(os, static_cast<std::uint32_t>(d));
  for (float v : t.data) put_f32(os, v);
}

}  // namespace detail

struct CheckpointInfo {
  ModelConfig config;
  long long step = 0;
  bool has_optimizer = false;
};

inline void save_checkpoint(Network<float>& model, const std::string& path,
                            long long step = 0, bool with_optimizer = false) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(IoErrorKind::kWriteFailed, "cannot write " + path);
  os.write(detail::kCkptMagic, 8);
  detail::put_u32(os, detail::kCkptVersion);

  const ModelConfig& c = model.config();
  std::ostringstream meta;
  meta << "num_blocks=" << c.num_blocks << "\ndense_layers=" << c.dense_layers
       << "\nbase_channels=" << c.base_channels << "\ngrowth_channels=" << c.growth_channels
       << "\nlevel_count=" << c.level_count << "\nca_enabled=" << (c.ca_enabled ? 1 : 0)
       << "\nsa_enabled=" << (c.sa_enabled ? 1 : 0) << "\nsc_enabled=" << (c.sc_enabled ? 1 : 0)
       << "\nca_reduction=" << c.ca_reduction << "\nseed=" << c.seed << "\nstep=" << step
       << "\noptimizer_state=" << (with_optimizer ? 1 : 0) << "\n";
  const std::string m = meta.str();
  detail::put_u32(os, static_cast<std::uint32_t>(m.size()));
  os.write(m.data(), static_cast<std::streamsize>(m.size()));

  for (Parameter<float>* p : model.parameters()) {
    detail::put_record(os, p->name, p->value);
    if (with_optimizer) {
      detail::put_record(os, p->name + "#m", p->m);
      detail::put_record(os, p->name + "#v", p->v);
    }
  }
  os.flush();
  if (!os) throw IoError(IoErrorKind::kWriteFailed, "checkpoint write failed: " + path);
}

inline std::pair<Network<float>, CheckpointInfo> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(IoErrorKind::kMissingFile, "cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != std::string(detail::kCkptMagic, 8))
    throw IoError(IoErrorKind::kUnsupportedFormat, path + ": not a checkpoint file");
  const std::uint32_t version = detail::get_u32(is);
  if (version != detail::kCkptVersion)
    throw IoError(IoErrorKind::kUnsupportedFormat,
                  path + ": unsupported checkpoint version " + std::to_string(version));

  const std::uint32_t meta_len = detail::get_u32(is);
  std::string meta(meta_len, '\0');
  is.read(meta.data(), meta_len);
  if (!is) throw IoError(IoErrorKind::kCorruptData, "checkpoint: truncated metadata");

  std::map<std::string, std::string> kv;
  std::istringstream ms(meta);
  std::string line;
  while (std::getline(ms, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto geti = [&kv](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end())
      throw IoError(IoErrorKind::kCorruptData, "checkpoint: missing metadata key " + k);
    return std::stoll(it->second);
  };

  CheckpointInfo info;
  info.config.num_blocks = static_cast<int>(geti("num_blocks"));
  info.config.dense_layers = static_cast<int>(geti("dense_layers"));
  info.config.base_channels = static_cast<int>(geti("base_channels"));
  info.config.growth_channels = static_cast<int>(geti("growth_channels"));
  info.config.level_count = static_cast<int>(geti("level_count"));
  info.config.ca_enabled = geti("ca_enabled") != 0;
  info.config.sa_enabled = geti("sa_enabled") != 0;
  info.config.sc_enabled = geti("sc_enabled") != 0;
  info.config.ca_reduction = static_cast<int>(geti("ca_reduction"));
  info.config.seed = static_cast<std::uint64_t>(geti("seed"));
  info.step = geti("step");
  info.has_optimizer = geti("optimizer_state") != 0;

  Network<float> model(info.config);
  std::map<std::string, Parameter<float>*> by_name;
  for (Parameter<float>* p : model.parameters()) by_name[p->name] = p;

  std::size_t expected = by_name.size() * (info.has_optimizer ? 3 : 1);
  std::size_t seen = 0;
  while (seen < expected) {
    const std::uint32_t name_len = detail::get_u32(is);
    if (name_len > 4096) throw IoError(IoErrorKind::kCorruptData, "checkpoint: bad record name");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const std::uint32_t rank = detail::get_u32(is);
    if (rank != 4) throw IoError(IoErrorKind::kCorruptData, "checkpoint: bad record rank");
    std::uint32_t dims[4];
    for (std::uint32_t& d : dims) d = detail::get_u32(is);

    std::string base = name;
    Tensor4<float>* dest_sel = nullptr;
    if (base.size() > 2 && base[base.size() - 2] == '#') {
      const char which = base.back();
      base = base.substr(0, base.size() - 2);
      auto it = by_name.find(base);
      if (it == by_name.end())
        throw IoError(IoErrorKind::kCorruptData, "checkpoint: unknown parameter " + name);
      dest_sel = which == 'm' ? &it->second->m : &it->second->v;
    } else {
      auto it = by_name.find(base);
      if (it == by_name.end())
        throw IoError(IoErrorKind::kCorruptData, "checkpoint: unknown parameter " + name);
      dest_sel = &it->second->value;
    }
    Tensor4<float>& dest = *dest_sel;
    if (dest.n != static_cast<int>(dims[0]) || dest.c != static_cast<int>(dims[1]) ||
        dest.h != static_cast<int>(dims[2]) || dest.w != static_cast<int>(dims[3]))
      throw IoError(IoErrorKind::kCorruptData,
                    "checkpoint: shape mismatch for " + name + " vs embedded config");
    for (float& v : dest.data) v = detail::get_f32(is);
    ++seen;
  }
  return {std::move(model), info};
}

}  // namespace anysr
