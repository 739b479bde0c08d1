// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "hfn/runconfig.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hfn::runconfig {
namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& what, int line) {
  throw std::invalid_argument("config: " + what + " (line " + std::to_string(line) + ")");
}

template <typename T>
T number(const std::string& key, const std::string& value, int line) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    fail("invalid value '" + value + "' for '" + key + "'", line);
  }
  return out;
}

bool boolean(const std::string& key, const std::string& value, int line) {
  if (value == "true") return true;
  if (value == "false") return false;
  fail("invalid value '" + value + "' for '" + key + "' (want true or false)", line);
}

}  // namespace

RunConfig parse_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;  // empty = top level
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') fail("unterminated section header '" + s + "'", line);
      section = s.substr(1, s.size() - 2);
      if (section != "model" && section != "train" && section != "data") {
        fail("unknown section [" + section + "]", line);
      }
      continue;
    }

    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail("expected key = value, got '" + s + "'", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail("missing key before '='", line);
    if (value.empty()) fail("missing value for '" + key + "'", line);

    if (section.empty()) {
      if (key == "target") {
        cfg.target = signals::parse_target(value);
      } else {
        fail("unknown key '" + key + "' at top level", line);
      }
    } else if (section == "model") {
      ModelConfig& m = cfg.model;
      if (key == "n") m.n = number<int>(key, value, line);
      else if (key == "scale") m.scale = number<int>(key, value, line);
      else if (key == "dropout") m.dropout = number<double>(key, value, line);
      else if (key == "classes") m.classes = number<int>(key, value, line);
      else if (key == "eeg_width") m.eeg_width = number<int>(key, value, line);
      else if (key == "ecg_width") m.ecg_width = number<int>(key, value, line);
      else if (key == "gsr_width") m.gsr_width = number<int>(key, value, line);
      else if (key == "eye_width") m.eye_width = number<int>(key, value, line);
      else if (key == "eeg_depth") m.eeg_depth = number<int>(key, value, line);
      else if (key == "ecg_depth") m.ecg_depth = number<int>(key, value, line);
      else if (key == "gsr_depth") m.gsr_depth = number<int>(key, value, line);
      else if (key == "eye_depth") m.eye_depth = number<int>(key, value, line);
      else if (key == "fusion_depth") m.fusion_depth = number<int>(key, value, line);
      else if (key == "eeg_len") m.eeg_len = number<int>(key, value, line);
      else if (key == "ecg_len") m.ecg_len = number<int>(key, value, line);
      else if (key == "gsr_len") m.gsr_len = number<int>(key, value, line);
      else if (key == "eye_len") m.eye_len = number<int>(key, value, line);
      else fail("unknown key '" + key + "' in [model]", line);
    } else if (section == "train") {
      training::TrainConfig& t = cfg.train;
      if (key == "max_lr") t.max_lr = number<double>(key, value, line);
      else if (key == "lr_min") t.lr_min = number<double>(key, value, line);
      else if (key == "lr_max") t.lr_max = number<double>(key, value, line);
      else if (key == "epochs") t.epochs = number<int>(key, value, line);
      else if (key == "patience") t.patience = number<int>(key, value, line);
      else if (key == "batch_size") t.batch_size = number<int>(key, value, line);
      else if (key == "beta1") t.beta1 = number<double>(key, value, line);
      else if (key == "beta2") t.beta2 = number<double>(key, value, line);
      else if (key == "eps") t.eps = number<double>(key, value, line);
      else if (key == "pct_start") t.pct_start = number<double>(key, value, line);
      else if (key == "div_factor") t.div_factor = number<double>(key, value, line);
      else if (key == "final_div_factor") t.final_div_factor = number<double>(key, value, line);
      else if (key == "seed") t.seed = number<std::uint64_t>(key, value, line);
      else if (key == "runs") t.runs = number<int>(key, value, line);
      else fail("unknown key '" + key + "' in [train]", line);
    } else {  // data
      training::DataConfig& d = cfg.data;
      if (key == "test_fraction") d.test_fraction = number<double>(key, value, line);
      else if (key == "val_fraction") d.val_fraction = number<double>(key, value, line);
      else if (key == "augment") d.augment = boolean(key, value, line);
      else if (key == "dir") cfg.data_dir = value;
      else fail("unknown key '" + key + "' in [data]", line);
    }
  }
  return cfg;
}

RunConfig load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return parse_text(text);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace hfn::runconfig
