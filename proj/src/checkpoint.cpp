// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "hfn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "hfn/rng.hpp"

namespace hfn::checkpoint {
namespace {

constexpr char kMagic[4] = {'H', 'F', 'N', '1'};
constexpr std::uint8_t kDtypeF32 = 0;

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void append_f32(std::string& out, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  append_u32(out, u);
}

void append_sized(std::string& out, const std::string& s) {
  append_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

// Bounds-checked little-endian reader over the loaded file.
struct Reader {
  const std::string& data;
  std::size_t off = 0;

  void need(std::size_t n) const {
    if (off + n > data.size()) throw std::runtime_error("truncated checkpoint");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data[off++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[off + static_cast<std::size_t>(i)])) << (8 * i);
    }
    off += 4;
    return v;
  }
  float f32() {
    const std::uint32_t u = u32();
    float f;
    std::memcpy(&f, &u, 4);
    return f;
  }
  std::string sized() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = data.substr(off, n);
    off += n;
    return s;
  }
};

nlohmann::json config_to_json(const ModelConfig& c) {
  nlohmann::json j;
  j["n"] = c.n;
  j["scale"] = c.scale;
  j["dropout"] = c.dropout;
  j["classes"] = c.classes;
  j["eeg_width"] = c.eeg_width;
  j["ecg_width"] = c.ecg_width;
  j["gsr_width"] = c.gsr_width;
  j["eye_width"] = c.eye_width;
  j["eeg_depth"] = c.eeg_depth;
  j["ecg_depth"] = c.ecg_depth;
  j["gsr_depth"] = c.gsr_depth;
  j["eye_depth"] = c.eye_depth;
  j["fusion_depth"] = c.fusion_depth;
  j["eeg_len"] = c.eeg_len;
  j["ecg_len"] = c.ecg_len;
  j["gsr_len"] = c.gsr_len;
  j["eye_len"] = c.eye_len;
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.n = j.at("n").get<int>();
  c.scale = j.at("scale").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.classes = j.at("classes").get<int>();
  c.eeg_width = j.at("eeg_width").get<int>();
  c.ecg_width = j.at("ecg_width").get<int>();
  c.gsr_width = j.at("gsr_width").get<int>();
  c.eye_width = j.at("eye_width").get<int>();
  c.eeg_depth = j.at("eeg_depth").get<int>();
  c.ecg_depth = j.at("ecg_depth").get<int>();
  c.gsr_depth = j.at("gsr_depth").get<int>();
  c.eye_depth = j.at("eye_depth").get<int>();
  c.fusion_depth = j.at("fusion_depth").get<int>();
  c.eeg_len = j.at("eeg_len").get<int>();
  c.ecg_len = j.at("ecg_len").get<int>();
  c.gsr_len = j.at("gsr_len").get<int>();
  c.eye_len = j.at("eye_len").get<int>();
  return c;
}

nlohmann::json meta_to_json(const Metadata& m) {
  nlohmann::json j;
  j["seed"] = m.seed;
  j["best_epoch"] = m.best_epoch;
  j["split_seed"] = m.split_seed;
  j["test_fraction"] = m.test_fraction;
  j["val_fraction"] = m.val_fraction;
  j["target"] = signals::target_name(m.target);
  j["metrics"] = nlohmann::json::parse(training::metrics_json(m.metrics));
  return j;
}

Metadata meta_from_json(const nlohmann::json& j) {
  Metadata m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.best_epoch = j.at("best_epoch").get<int>();
  m.split_seed = j.at("split_seed").get<std::uint64_t>();
  m.test_fraction = j.at("test_fraction").get<double>();
  m.val_fraction = j.at("val_fraction").get<double>();
  m.target = signals::parse_target(j.at("target").get<std::string>());
  const nlohmann::json& mm = j.at("metrics");
  m.metrics.accuracy = mm.at("accuracy").get<double>();
  m.metrics.f1_macro = mm.at("f1_macro").get<double>();
  for (int c = 0; c < 3; ++c) {
    m.metrics.precision[static_cast<std::size_t>(c)] = mm.at("precision")[static_cast<std::size_t>(c)].get<double>();
    m.metrics.recall[static_cast<std::size_t>(c)] = mm.at("recall")[static_cast<std::size_t>(c)].get<double>();
    m.metrics.f1[static_cast<std::size_t>(c)] = mm.at("f1")[static_cast<std::size_t>(c)].get<double>();
    for (int k = 0; k < 3; ++k) {
      m.metrics.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] =
          mm.at("confusion")[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)].get<std::int64_t>();
    }
  }
  return m;
}

std::string shape_text(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace

void save(const std::string& path, HyperFuseNet<float>& model, const Metadata& meta) {
  std::string body(kMagic, 4);
  append_u32(body, kVersion);
  append_sized(body, config_to_json(model.config()).dump());
  append_sized(body, meta_to_json(meta).dump());

  const auto state = model.named_state();
  append_u32(body, static_cast<std::uint32_t>(state.size()));
  for (const auto& [name, tensor] : state) {
    append_sized(body, name);
    append_u8(body, kDtypeF32);
    const auto& shape = tensor.shape();
    append_u32(body, static_cast<std::uint32_t>(shape.size()));
    for (int d : shape) append_u32(body, static_cast<std::uint32_t>(d));
    for (float v : tensor.values()) append_f32(body, v);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) throw std::runtime_error("failed while writing " + path);
}

Loaded load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  Reader r{data};
  r.need(4);
  if (std::memcmp(data.data(), kMagic, 4) != 0) {
    throw std::runtime_error(path + " is not a checkpoint (bad magic)");
  }
  r.off = 4;
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }

  const ModelConfig cfg = config_from_json(nlohmann::json::parse(r.sized()));
  cfg.validate();
  const Metadata meta = meta_from_json(nlohmann::json::parse(r.sized()));

  // Initialization is immediately overwritten by the stored tensors.
  Rng rng(0);
  HyperFuseNet<float> model(cfg, rng);
  auto state = model.named_state();

  const std::uint32_t count = r.u32();
  if (count != state.size()) {
    throw std::runtime_error("checkpoint holds " + std::to_string(count) + " tensors, model has " +
                             std::to_string(state.size()));
  }
  for (auto& [name, tensor] : state) {
    const std::string stored_name = r.sized();
    if (stored_name != name) {
      throw std::runtime_error("checkpoint tensor '" + stored_name + "' where model expects '" +
                               name + "'");
    }
    if (r.u8() != kDtypeF32) {
      throw std::runtime_error("tensor '" + name + "': unsupported dtype");
    }
    const std::uint32_t ndim = r.u32();
    std::vector<int> shape(ndim);
    for (std::uint32_t i = 0; i < ndim; ++i) shape[i] = static_cast<int>(r.u32());
    if (shape != tensor.shape()) {
      throw std::runtime_error("tensor '" + name + "': checkpoint shape " + shape_text(shape) +
                               ", model shape " + shape_text(tensor.shape()));
    }
    std::vector<float>& values = tensor.values();
    for (float& v : values) v = r.f32();
  }
  if (r.off != data.size()) {
    throw std::runtime_error("checkpoint has " + std::to_string(data.size() - r.off) +
                             " trailing bytes");
  }
  return Loaded{cfg, meta, std::move(model)};
}

}  // namespace hfn::checkpoint
