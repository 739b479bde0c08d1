// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training recipe: Adam with a one-cycle learning-rate schedule, early
// stopping on validation macro-F1, random learning-rate search, and
// repeated runs reported as mean +/- std. Data preparation (stratified
// test split, validation carve-out, augmentation) lives here too so
// every entry point prepares data the same way.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hfn/model.hpp"
#include "hfn/signals.hpp"
#include "hfn/tensor.hpp"

namespace hfn::training {

struct TrainConfig {
  double max_lr = 0.003;

  // Learning-rate search range (log-uniform sampling).
  double lr_min = 0.001;
  double lr_max = 0.008;

  int epochs = 100;
  int patience = 20;  // consecutive epochs without val-F1 improvement
  int batch_size = 32;

  // Adam moments.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  // One-cycle shape: ramp over the first pct_start of all steps from
  // max_lr/div_factor, anneal down to max_lr/final_div_factor.
  double pct_start = 0.3;
  double div_factor = 25.0;
  double final_div_factor = 1e4;

  std::uint64_t seed = 0;
  int runs = 3;

  void validate() const;
};

// How a processed sample set is carved up before training.
struct DataConfig {
  double test_fraction = 0.20;
  double val_fraction = 0.10;  // of the post-test training pool
  bool augment = true;

  void validate() const;
};

struct Metrics {
  double accuracy = 0.0;  // percent
  double f1_macro = 0.0;  // percent
  std::array<double, 3> precision{};  // percent, per class
  std::array<double, 3> recall{};
  std::array<double, 3> f1{};
  std::array<std::array<std::int64_t, 3>, 3> confusion{};  // [true][predicted]
};

// Metrics derived from a filled confusion matrix. A class absent from
// both predictions and targets scores precision = recall = F1 = 0.
Metrics metrics_from_confusion(const std::array<std::array<std::int64_t, 3>, 3>& confusion);

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_f1 = 0.0;  // percent
  double lr = 0.0;      // rate at the last optimizer step of the epoch
};

struct History {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 1-based epoch whose snapshot the model keeps
};

// CSV with header "epoch,train_loss,val_loss,val_f1,lr".
std::string history_csv(const History& history);

// JSON document with the Metrics fields.
std::string metrics_json(const Metrics& metrics);

// Learning rate for 0 <= step < total_steps: cosine ramp from
// max_lr/div_factor to max_lr over the first pct_start fraction, then
// cosine anneal to max_lr/final_div_factor at the final step.
double one_cycle_lr(std::int64_t step, std::int64_t total_steps, const TrainConfig& cfg);

// Adam first/second moments, one slot per parameter tensor. Allocated
// lazily on the first step; afterwards the shapes must keep matching.
struct AdamState {
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;
  std::int64_t t = 0;
};

// One bias-corrected Adam update over every parameter, reading each
// tensor's accumulated gradient (missing gradients count as zero).
void adam_step(std::vector<std::pair<std::string, Tensor<float>>>& params, AdamState& state,
               const TrainConfig& cfg, double lr);

// Early-stopping bookkeeping: feed one validation score per epoch;
// record() returns true once `patience` consecutive epochs failed to
// strictly improve on the best score seen.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience);

  bool record(double score);

  int epoch() const { return epoch_; }
  int best_epoch() const { return best_epoch_; }
  double best_score() const { return best_score_; }
  bool improved_last() const { return improved_last_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  double best_score_ = 0.0;
  int stale_ = 0;
  bool improved_last_ = false;
};

// Stratified test split, validation carve-out from the remaining pool,
// then optional augmentation of the final training portion. Both
// splits and the augmentation derive from `seed`.
struct PreparedData {
  std::vector<signals::Sample> train;
  std::vector<signals::Sample> val;
  std::vector<signals::Sample> test;
};

PreparedData prepare_data(const std::vector<signals::Sample>& samples, signals::Target target,
                          const DataConfig& data_cfg, std::uint64_t seed);

// Trains the model in place with seeded shuffled mini-batches, tracking
// validation macro-F1 each epoch. On return the model holds the
// best-epoch snapshot (parameters and batch-norm running statistics).
History train(HyperFuseNet<float>& model, const std::vector<signals::Sample>& train_set,
              const std::vector<signals::Sample>& val_set, const TrainConfig& cfg,
              signals::Target target);

// Confusion matrix and derived metrics over a held-out set.
Metrics evaluate(HyperFuseNet<float>& model, const std::vector<signals::Sample>& test_set,
                 signals::Target target);

struct LrTrial {
  double max_lr = 0.0;
  double val_f1 = 0.0;  // percent, best validation F1 of the short run
};

struct LrSearchResult {
  double best_max_lr = 0.0;
  double best_val_f1 = 0.0;
  std::vector<LrTrial> trials;  // in draw order
};

// Random search: candidates drawn log-uniform from [lr_min, lr_max]
// (seeded), each scored by a short training run on the validation set.
// Ties keep the earliest-drawn candidate.
LrSearchResult lr_search(const ModelConfig& model_cfg, const TrainConfig& cfg,
                         const DataConfig& data_cfg,
                         const std::vector<signals::Sample>& samples, signals::Target target,
                         int trials, int search_epochs = 10);

struct RunResult {
  std::uint64_t seed = 0;
  Metrics test_metrics;
  History history;
};

struct RepeatedResult {
  std::vector<RunResult> runs;
  double f1_mean = 0.0;
  double f1_std = 0.0;  // sample standard deviation; 0 when runs == 1
  double acc_mean = 0.0;
  double acc_std = 0.0;
  std::array<std::array<std::int64_t, 3>, 3> confusion{};  // summed over runs
};

// cfg.runs full trainings with seeds cfg.seed + 0 .. cfg.seed + runs-1
// on one shared data preparation (base seed). When `trained` is given
// it receives the best-epoch model of every run, in run order.
RepeatedResult run_repeated(const ModelConfig& model_cfg, const TrainConfig& cfg,
                            const DataConfig& data_cfg,
                            const std::vector<signals::Sample>& samples, signals::Target target,
                            std::vector<HyperFuseNet<float>>* trained = nullptr);

}  // namespace hfn::training
