// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "hfn/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hfn/checkpoint.hpp"
#include "hfn/dataset.hpp"
#include "hfn/model.hpp"
#include "hfn/rng.hpp"
#include "hfn/runconfig.hpp"
#include "hfn/signals.hpp"
#include "hfn/training.hpp"

namespace hfn::cli {
namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string lr_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void print_confusion(const std::array<std::array<std::int64_t, 3>, 3>& m) {
  std::cout << "confusion (rows = true class):\n";
  for (const auto& row : m) {
    std::cout << " ";
    for (std::int64_t v : row) std::cout << " " << v;
    std::cout << "\n";
  }
}

void print_metrics(const training::Metrics& m) {
  std::cout << "accuracy: " << pct(m.accuracy) << "\n";
  std::cout << "macro F1: " << pct(m.f1_macro) << "\n";
  std::cout << "class precision recall f1\n";
  for (int c = 0; c < 3; ++c) {
    std::cout << c << " " << pct(m.precision[static_cast<std::size_t>(c)]) << " "
              << pct(m.recall[static_cast<std::size_t>(c)]) << " "
              << pct(m.f1[static_cast<std::size_t>(c)]) << "\n";
  }
  print_confusion(m.confusion);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("failed while writing " + path);
}

// Shared flag state for train/search/eval.
struct CommonOpts {
  std::string data_dir;
  std::string target;
  std::string config_path;
};

runconfig::RunConfig effective_config(const CommonOpts& opts) {
  runconfig::RunConfig cfg;
  if (!opts.config_path.empty()) cfg = runconfig::load_file(opts.config_path);
  if (!opts.target.empty()) cfg.target = signals::parse_target(opts.target);
  if (!opts.data_dir.empty()) cfg.data_dir = opts.data_dir;
  if (cfg.data_dir.empty()) {
    throw std::invalid_argument("no dataset given: pass --data or set [data] dir in the config");
  }
  return cfg;
}

void check_feature_shapes(const ModelConfig& model_cfg, const signals::Sample& sample) {
  const auto mismatch = [](const char* name, std::size_t want, std::size_t got) {
    return std::string(name) + " " + std::to_string(want) + " vs " + std::to_string(got);
  };
  if (sample.eeg.size() == static_cast<std::size_t>(model_cfg.eeg_len) &&
      sample.ecg.size() == static_cast<std::size_t>(model_cfg.ecg_len) &&
      sample.gsr.size() == static_cast<std::size_t>(model_cfg.gsr_len) &&
      sample.eye.size() == static_cast<std::size_t>(model_cfg.eye_len)) {
    return;
  }
  throw std::invalid_argument(
      "feature lengths disagree (model vs dataset): " +
      mismatch("eeg", static_cast<std::size_t>(model_cfg.eeg_len), sample.eeg.size()) + ", " +
      mismatch("ecg", static_cast<std::size_t>(model_cfg.ecg_len), sample.ecg.size()) + ", " +
      mismatch("gsr", static_cast<std::size_t>(model_cfg.gsr_len), sample.gsr.size()) + ", " +
      mismatch("eye", static_cast<std::size_t>(model_cfg.eye_len), sample.eye.size()));
}

int cmd_synth(const std::string& output, int trials, std::uint64_t seed, double separability) {
  const auto records = signals::synthesize_dataset(seed, trials, separability);
  dataset::write_dataset(output, records, /*processed=*/false);
  std::cout << "wrote " << records.size() << " raw trials to " << output << "\n";
  return 0;
}

int cmd_preprocess(const std::string& input, const std::string& output,
                   const std::string& config_path) {
  if (!config_path.empty()) runconfig::load_file(config_path);  // reject typos early
  const dataset::Dataset ds = dataset::read_dataset(input);
  if (ds.processed) {
    throw std::invalid_argument("preprocess: " + input + " is already processed");
  }
  std::vector<signals::TrialRecord> segments;
  for (const signals::TrialRecord& trial : ds.records) {
    const signals::TrialRecord processed = signals::preprocess_trial(trial);
    auto segs = signals::segment_records(processed);
    std::cout << trial.name << ": " << segs.size() << " segments\n";
    for (auto& s : segs) segments.push_back(std::move(s));
  }
  dataset::write_dataset(output, segments, /*processed=*/true);
  std::cout << "wrote " << segments.size() << " samples to " << output << "\n";
  return 0;
}

int cmd_train(const CommonOpts& opts, int runs_override, const std::string& out_path) {
  runconfig::RunConfig cfg = effective_config(opts);
  if (runs_override > 0) cfg.train.runs = runs_override;
  cfg.model.validate();
  cfg.train.validate();
  cfg.data.validate();

  const std::vector<signals::Sample> samples = dataset::load_samples(cfg.data_dir);
  if (samples.empty()) throw std::invalid_argument("train: dataset is empty");
  check_feature_shapes(cfg.model, samples.front());

  std::vector<HyperFuseNet<float>> models;
  const training::RepeatedResult result =
      training::run_repeated(cfg.model, cfg.train, cfg.data, samples, cfg.target, &models);

  std::cout << "target: " << signals::target_name(cfg.target) << "  runs: " << cfg.train.runs
            << "  samples: " << samples.size() << "\n";
  std::cout << "run seed best_epoch f1 acc\n";
  for (std::size_t k = 0; k < result.runs.size(); ++k) {
    const training::RunResult& run = result.runs[k];
    std::cout << k << " " << run.seed << " " << run.history.best_epoch << " "
              << pct(run.test_metrics.f1_macro) << " " << pct(run.test_metrics.accuracy) << "\n";

    const std::string ckpt_path =
        result.runs.size() == 1 ? out_path : out_path + ".run" + std::to_string(k);
    checkpoint::Metadata meta;
    meta.seed = run.seed;
    meta.best_epoch = run.history.best_epoch;
    meta.metrics = run.test_metrics;
    meta.split_seed = cfg.train.seed;
    meta.test_fraction = cfg.data.test_fraction;
    meta.val_fraction = cfg.data.val_fraction;
    meta.target = cfg.target;
    checkpoint::save(ckpt_path, models[k], meta);
    write_text(ckpt_path + ".history.csv", training::history_csv(run.history));
  }

  std::cout << "F1:       " << pct(result.f1_mean) << " ± " << pct(result.f1_std) << "\n";
  std::cout << "Accuracy: " << pct(result.acc_mean) << " ± " << pct(result.acc_std) << "\n";
  print_confusion(result.confusion);

  nlohmann::json report;
  report["target"] = signals::target_name(cfg.target);
  report["runs"] = cfg.train.runs;
  report["f1_mean"] = result.f1_mean;
  report["f1_std"] = result.f1_std;
  report["acc_mean"] = result.acc_mean;
  report["acc_std"] = result.acc_std;
  report["confusion"] = result.confusion;
  write_text(out_path + ".metrics.json", report.dump(2) + "\n");
  std::cout << "report: " << out_path << ".metrics.json\n";
  return 0;
}

int cmd_search(const CommonOpts& opts, int trials, int search_epochs) {
  runconfig::RunConfig cfg = effective_config(opts);
  cfg.model.validate();
  cfg.train.validate();
  cfg.data.validate();

  const std::vector<signals::Sample> samples = dataset::load_samples(cfg.data_dir);
  if (samples.empty()) throw std::invalid_argument("search: dataset is empty");
  check_feature_shapes(cfg.model, samples.front());

  const training::LrSearchResult result = training::lr_search(
      cfg.model, cfg.train, cfg.data, samples, cfg.target, trials, search_epochs);

  std::cout << "trial max_lr val_f1\n";
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    std::cout << i << " " << lr_text(result.trials[i].max_lr) << " "
              << pct(result.trials[i].val_f1) << "\n";
  }
  std::cout << "best max_lr: " << lr_text(result.best_max_lr) << " (val F1 "
            << pct(result.best_val_f1) << ")\n";
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_dir,
             const std::string& target_flag, const std::string& split) {
  checkpoint::Loaded loaded = checkpoint::load(model_path);
  const signals::Target target =
      target_flag.empty() ? loaded.meta.target : signals::parse_target(target_flag);

  const std::vector<signals::Sample> samples = dataset::load_samples(data_dir);
  if (samples.empty()) throw std::invalid_argument("eval: dataset is empty");
  check_feature_shapes(loaded.config, samples.front());

  std::vector<signals::Sample> eval_set;
  if (split == "test") {
    // Rebuild the training-time partition so the scores refer to the
    // same held-out samples the checkpoint metadata reports.
    training::DataConfig dc;
    dc.test_fraction = loaded.meta.test_fraction;
    dc.val_fraction = loaded.meta.val_fraction;
    dc.augment = false;
    eval_set = training::prepare_data(samples, target, dc, loaded.meta.split_seed).test;
  } else if (split == "all") {
    eval_set = samples;
  } else {
    throw std::invalid_argument("eval: --split must be 'test' or 'all', got '" + split + "'");
  }

  const training::Metrics m = training::evaluate(loaded.model, eval_set, target);
  std::cout << "target: " << signals::target_name(target) << "  samples: " << eval_set.size()
            << " (" << split << ")\n";
  print_metrics(m);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"HyperFuseNet signal fusion trainer"};
  app.require_subcommand(1);

  std::string synth_out;
  int synth_trials = 30;
  std::uint64_t synth_seed = 0;
  double synth_sep = 1.0;
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic raw dataset");
  synth->add_option("--output", synth_out, "Output dataset directory")->required();
  synth->add_option("--trials", synth_trials, "Number of trials (>= 6)");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--separability", synth_sep, "Class amplitude separation");

  std::string pre_in, pre_out, pre_cfg;
  CLI::App* pre = app.add_subcommand("preprocess", "Filter, resample, and segment a raw dataset");
  pre->add_option("--input", pre_in, "Raw dataset directory")->required();
  pre->add_option("--output", pre_out, "Processed dataset directory")->required();
  pre->add_option("--config", pre_cfg, "Run configuration file");

  CommonOpts train_opts;
  int train_runs = 0;
  std::string train_out;
  CLI::App* train = app.add_subcommand("train", "Train and report mean ± std over runs");
  train->add_option("--data", train_opts.data_dir, "Processed dataset directory");
  train->add_option("--target", train_opts.target, "arousal or valence");
  train->add_option("--config", train_opts.config_path, "Run configuration file");
  train->add_option("--runs", train_runs, "Override the configured run count");
  train->add_option("--out", train_out, "Checkpoint path")->required();

  CommonOpts search_opts;
  int search_trials = 8;
  int search_epochs = 10;
  CLI::App* search = app.add_subcommand("search", "Random learning-rate search");
  search->add_option("--data", search_opts.data_dir, "Processed dataset directory");
  search->add_option("--target", search_opts.target, "arousal or valence");
  search->add_option("--config", search_opts.config_path, "Run configuration file");
  search->add_option("--trials", search_trials, "Number of candidates");
  search->add_option("--search-epochs", search_epochs, "Epoch budget per candidate");

  std::string eval_model, eval_data, eval_target;
  std::string eval_split = "test";
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--model", eval_model, "Checkpoint path")->required();
  eval->add_option("--data", eval_data, "Processed dataset directory")->required();
  eval->add_option("--target", eval_target, "arousal or valence");
  eval->add_option("--split", eval_split, "'test' (training-time split) or 'all'");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("hfn");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_out, synth_trials, synth_seed, synth_sep);
    if (pre->parsed()) return cmd_preprocess(pre_in, pre_out, pre_cfg);
    if (train->parsed()) return cmd_train(train_opts, train_runs, train_out);
    if (search->parsed()) return cmd_search(search_opts, search_trials, search_epochs);
    if (eval->parsed()) return cmd_eval(eval_model, eval_data, eval_target, eval_split);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace hfn::cli
