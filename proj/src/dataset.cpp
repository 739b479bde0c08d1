// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "hfn/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hfn::dataset {

namespace {

using signals::SignalMatrix;
using signals::TrialRecord;

void write_csv(const fs::path& path, const SignalMatrix& m, const std::string& record) {
  if (static_cast<int>(m.channel_names.size()) != m.channels) {
    throw std::runtime_error(path.filename().string() + " of record " + record +
                             " needs one channel name per row to be written");
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  for (int c = 0; c < m.channels; ++c) {
    if (c) f << ',';
    f << m.channel_names[static_cast<std::size_t>(c)];
  }
  f << '\n';
  char buf[32];
  for (int t = 0; t < m.samples; ++t) {
    std::string line;
    for (int c = 0; c < m.channels; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m.at(c, t));
      if (c) line += ',';
      line += buf;
    }
    line += '\n';
    f << line;
  }
  if (!f) throw std::runtime_error("failed while writing " + path.string());
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

SignalMatrix read_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error(path.string() + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> names = split_row(line);

  std::vector<double> values;
  int rows = 0;
  for (int rownum = 2; std::getline(f, line); ++rownum) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> cells = split_row(line);
    if (cells.size() != names.size()) {
      throw std::runtime_error(path.string() + " row " + std::to_string(rownum) + ": expected " +
                               std::to_string(names.size()) + " columns, got " +
                               std::to_string(cells.size()));
    }
    for (const std::string& cell : cells) {
      double v = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || end != cell.data() + cell.size()) {
        throw std::runtime_error(path.string() + " row " + std::to_string(rownum) +
                                 ": cannot parse '" + cell + "' as a number");
      }
      values.push_back(v);
    }
    ++rows;
  }

  SignalMatrix m(static_cast<int>(names.size()), rows);
  m.channel_names = names;
  for (int t = 0; t < rows; ++t) {
    for (int c = 0; c < m.channels; ++c) {
      m.at(c, t) = values[static_cast<std::size_t>(t) * m.channels + c];
    }
  }
  return m;
}

json names_json(const SignalMatrix& m) { return json(m.channel_names); }

void check_names(const fs::path& path, const SignalMatrix& m, const json& manifest_names) {
  const std::vector<std::string> expect = manifest_names.get<std::vector<std::string>>();
  if (m.channel_names != expect) {
    throw std::runtime_error(path.string() + ": channel names disagree with the manifest");
  }
}

}  // namespace

void write_dataset(const std::string& root, const std::vector<TrialRecord>& records,
                   bool processed) {
  const fs::path base(root);
  fs::create_directories(base);

  json manifest;
  manifest["processed"] = processed;
  manifest["trials"] = json::array();
  for (const TrialRecord& tr : records) {
    json entry;
    entry["name"] = tr.name;
    entry["arousal_rating"] = tr.arousal_rating;
    entry["valence_rating"] = tr.valence_rating;
    entry["eeg_hz"] = tr.eeg_hz;
    entry["ecg_hz"] = tr.ecg_hz;
    entry["gsr_hz"] = tr.gsr_hz;
    entry["eye_hz"] = tr.eye_hz;
    entry["eeg_channels"] = names_json(tr.eeg);
    entry["ecg_channels"] = names_json(tr.ecg);
    entry["gsr_channels"] = names_json(tr.gsr);
    entry["eye_channels"] = names_json(tr.eye);
    entry["has_gsr_pre"] = tr.gsr_pre.samples > 0;
    manifest["trials"].push_back(std::move(entry));

    const fs::path dir = base / tr.name;
    fs::create_directories(dir);
    write_csv(dir / "eeg.csv", tr.eeg, tr.name);
    write_csv(dir / "ecg.csv", tr.ecg, tr.name);
    write_csv(dir / "gsr.csv", tr.gsr, tr.name);
    write_csv(dir / "eye.csv", tr.eye, tr.name);
    if (tr.gsr_pre.samples > 0) write_csv(dir / "gsr_pre.csv", tr.gsr_pre, tr.name);
  }

  std::ofstream f(base / "manifest.json");
  if (!f) throw std::runtime_error("cannot write " + (base / "manifest.json").string());
  f << manifest.dump(2) << '\n';
}

Dataset read_dataset(const std::string& root) {
  const fs::path base(root);
  const fs::path mpath = base / "manifest.json";
  std::ifstream mf(mpath);
  if (!mf) throw std::runtime_error("cannot open " + mpath.string());
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw std::runtime_error(mpath.string() + ": " + e.what());
  }

  Dataset ds;
  ds.processed = manifest.value("processed", false);
  if (!manifest.contains("trials") || !manifest["trials"].is_array()) {
    throw std::runtime_error(mpath.string() + ": missing trial list");
  }
  for (const json& entry : manifest["trials"]) {
    TrialRecord tr;
    try {
      tr.name = entry.at("name").get<std::string>();
      tr.arousal_rating = entry.at("arousal_rating").get<int>();
      tr.valence_rating = entry.at("valence_rating").get<int>();
      tr.eeg_hz = entry.at("eeg_hz").get<double>();
      tr.ecg_hz = entry.at("ecg_hz").get<double>();
      tr.gsr_hz = entry.at("gsr_hz").get<double>();
      tr.eye_hz = entry.at("eye_hz").get<double>();
    } catch (const json::exception& e) {
      throw std::runtime_error(mpath.string() + ": trial entry: " + e.what());
    }
    const fs::path dir = base / tr.name;
    tr.eeg = read_csv(dir / "eeg.csv");
    tr.ecg = read_csv(dir / "ecg.csv");
    tr.gsr = read_csv(dir / "gsr.csv");
    tr.eye = read_csv(dir / "eye.csv");
    check_names(dir / "eeg.csv", tr.eeg, entry.at("eeg_channels"));
    check_names(dir / "ecg.csv", tr.ecg, entry.at("ecg_channels"));
    check_names(dir / "gsr.csv", tr.gsr, entry.at("gsr_channels"));
    check_names(dir / "eye.csv", tr.eye, entry.at("eye_channels"));
    if (entry.value("has_gsr_pre", false)) tr.gsr_pre = read_csv(dir / "gsr_pre.csv");
    ds.records.push_back(std::move(tr));
  }
  return ds;
}

std::vector<signals::Sample> load_samples(const std::string& root) {
  const Dataset ds = read_dataset(root);
  if (!ds.processed) {
    throw std::runtime_error(root + ": dataset is not marked processed; preprocess it first");
  }
  std::vector<signals::Sample> samples;
  samples.reserve(ds.records.size());
  for (const TrialRecord& tr : ds.records) samples.push_back(signals::sample_from_segment(tr));
  return samples;
}

}  // namespace hfn::dataset
