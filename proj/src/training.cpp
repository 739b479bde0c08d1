// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "hfn/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "hfn/layers.hpp"
#include "hfn/rng.hpp"

namespace hfn::training {
namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<signals::Sample> gather(const std::vector<signals::Sample>& samples,
                                    const std::vector<int>& indices) {
  std::vector<signals::Sample> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(samples[static_cast<std::size_t>(i)]);
  return out;
}

// Stacks samples order[from..to) into one [count, features] tensor per
// modality. Shape validation against the model config happens inside
// the model's forward.
ModalBatch<float> make_batch(const std::vector<signals::Sample>& set, const int* order,
                             int count) {
  const signals::Sample& first = set[static_cast<std::size_t>(order[0])];
  const int eeg_len = static_cast<int>(first.eeg.size());
  const int ecg_len = static_cast<int>(first.ecg.size());
  const int gsr_len = static_cast<int>(first.gsr.size());
  const int eye_len = static_cast<int>(first.eye.size());
  ModalBatch<float> batch{Tensor<float>({count, eeg_len}), Tensor<float>({count, ecg_len}),
                          Tensor<float>({count, gsr_len}), Tensor<float>({count, eye_len})};
  for (int i = 0; i < count; ++i) {
    const signals::Sample& s = set[static_cast<std::size_t>(order[i])];
    if (static_cast<int>(s.eeg.size()) != eeg_len || static_cast<int>(s.ecg.size()) != ecg_len ||
        static_cast<int>(s.gsr.size()) != gsr_len || static_cast<int>(s.eye.size()) != eye_len) {
      throw std::invalid_argument("batch: samples disagree on feature lengths");
    }
    auto copy_row = [i](const std::vector<float>& src, Tensor<float>& dst) {
      std::copy(src.begin(), src.end(),
                dst.values().begin() + static_cast<std::ptrdiff_t>(i) * src.size());
    };
    copy_row(s.eeg, batch.eeg);
    copy_row(s.ecg, batch.ecg);
    copy_row(s.gsr, batch.gsr);
    copy_row(s.eye, batch.eye);
  }
  return batch;
}

std::vector<int> make_targets(const std::vector<signals::Sample>& set, const int* order,
                              int count, signals::Target target) {
  std::vector<int> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = signals::class_of(set[static_cast<std::size_t>(order[i])], target);
  }
  return out;
}

// Eval-mode sweep: mean cross-entropy and argmax predictions, chunked
// so memory stays bounded on large sets.
struct EvalPass {
  double loss = 0.0;
  std::vector<int> predictions;
};

EvalPass eval_pass(HyperFuseNet<float>& model, const std::vector<signals::Sample>& set,
                   signals::Target target, int chunk_size) {
  NoGradGuard guard;
  const int n = static_cast<int>(set.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  EvalPass out;
  out.predictions.reserve(set.size());
  double loss_sum = 0.0;
  for (int from = 0; from < n; from += chunk_size) {
    const int count = std::min(chunk_size, n - from);
    ModalBatch<float> batch = make_batch(set, order.data() + from, count);
    std::vector<int> targets = make_targets(set, order.data() + from, count, target);
    Tensor<float> logits = model.forward(batch, false);
    loss_sum += static_cast<double>(cross_entropy(logits, targets).item()) * count;
    const int classes = logits.shape()[1];
    for (int i = 0; i < count; ++i) {
      out.predictions.push_back(argmax_lowest(
          logits.values().data() + static_cast<std::size_t>(i) * classes, classes));
    }
  }
  out.loss = loss_sum / n;
  return out;
}

std::array<std::array<std::int64_t, 3>, 3> confusion_of(
    const std::vector<signals::Sample>& set, const std::vector<int>& predictions,
    signals::Target target) {
  std::array<std::array<std::int64_t, 3>, 3> m{};
  for (std::size_t i = 0; i < set.size(); ++i) {
    m[static_cast<std::size_t>(signals::class_of(set[i], target))]
     [static_cast<std::size_t>(predictions[i])] += 1;
  }
  return m;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(max_lr > 0.0)) throw std::invalid_argument("train config: max_lr must be positive");
  if (!(lr_min > 0.0) || !(lr_min <= lr_max)) {
    throw std::invalid_argument("train config: learning-rate range must satisfy 0 < lr_min <= lr_max");
  }
  if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("train config: patience must be >= 1");
  if (patience >= epochs) {
    throw std::invalid_argument("train config: patience " + std::to_string(patience) +
                                " must be < epochs " + std::to_string(epochs));
  }
  if (batch_size < 2) {
    throw std::invalid_argument("train config: batch_size must be >= 2 (batch norm)");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("train config: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("train config: eps must be positive");
  if (!(pct_start > 0.0 && pct_start < 1.0)) {
    throw std::invalid_argument("train config: pct_start must lie in (0, 1)");
  }
  if (!(div_factor > 0.0) || !(final_div_factor > 0.0)) {
    throw std::invalid_argument("train config: div factors must be positive");
  }
  if (runs < 1) throw std::invalid_argument("train config: runs must be >= 1");
}

void DataConfig::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0) ||
      !(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("data config: fractions must lie in (0, 1)");
  }
}

Metrics metrics_from_confusion(const std::array<std::array<std::int64_t, 3>, 3>& confusion) {
  std::int64_t total = 0;
  std::int64_t trace = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) total += confusion[i][j];
    trace += confusion[i][i];
  }
  if (total == 0) throw std::invalid_argument("metrics: empty confusion matrix");
  Metrics m;
  m.confusion = confusion;
  m.accuracy = 100.0 * static_cast<double>(trace) / static_cast<double>(total);
  double f1_sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    std::int64_t tp = confusion[c][c];
    std::int64_t row = 0;
    std::int64_t col = 0;
    for (int j = 0; j < 3; ++j) {
      row += confusion[c][j];
      col += confusion[j][c];
    }
    const double precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    const double recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    const double f1 =
        precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    m.precision[static_cast<std::size_t>(c)] = 100.0 * precision;
    m.recall[static_cast<std::size_t>(c)] = 100.0 * recall;
    m.f1[static_cast<std::size_t>(c)] = 100.0 * f1;
    f1_sum += 100.0 * f1;
  }
  m.f1_macro = f1_sum / 3.0;
  return m;
}

std::string history_csv(const History& history) {
  std::string out = "epoch,train_loss,val_loss,val_f1,lr\n";
  for (const EpochStats& e : history.epochs) {
    out += std::to_string(e.epoch);
    out += ',';
    out += format_double(e.train_loss);
    out += ',';
    out += format_double(e.val_loss);
    out += ',';
    out += format_double(e.val_f1);
    out += ',';
    out += format_double(e.lr);
    out += '\n';
  }
  return out;
}

std::string metrics_json(const Metrics& metrics) {
  nlohmann::json j;
  j["accuracy"] = metrics.accuracy;
  j["f1_macro"] = metrics.f1_macro;
  j["precision"] = metrics.precision;
  j["recall"] = metrics.recall;
  j["f1"] = metrics.f1;
  j["confusion"] = metrics.confusion;
  return j.dump(2);
}

double one_cycle_lr(std::int64_t step, std::int64_t total_steps, const TrainConfig& cfg) {
  if (total_steps < 1) throw std::invalid_argument("one_cycle_lr: total_steps must be >= 1");
  if (step < 0 || step >= total_steps) {
    throw std::out_of_range("one_cycle_lr: step " + std::to_string(step) + " outside [0, " +
                            std::to_string(total_steps) + ")");
  }
  const double init_lr = cfg.max_lr / cfg.div_factor;
  const double final_lr = cfg.max_lr / cfg.final_div_factor;
  const double ramp = cfg.pct_start * static_cast<double>(total_steps);
  const double s = static_cast<double>(step);
  if (s <= ramp) {
    const double u = s / ramp;
    return init_lr + (cfg.max_lr - init_lr) * 0.5 * (1.0 - std::cos(kPi * u));
  }
  // s > ramp and s <= total_steps - 1 imply a positive span here.
  const double u = (s - ramp) / (static_cast<double>(total_steps - 1) - ramp);
  return final_lr + (cfg.max_lr - final_lr) * 0.5 * (1.0 + std::cos(kPi * u));
}

void adam_step(std::vector<std::pair<std::string, Tensor<float>>>& params, AdamState& state,
               const TrainConfig& cfg, double lr) {
  if (state.t == 0 && state.m.empty() && state.v.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::size_t n = params[i].second.values().size();
      state.m[i].assign(n, 0.0f);
      state.v[i].assign(n, 0.0f);
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: state tracks " + std::to_string(state.m.size()) +
                                " tensors, model has " + std::to_string(params.size()));
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<float>& tensor = params[i].second;
    std::vector<float>& values = tensor.values();
    std::vector<float>& m = state.m[i];
    std::vector<float>& v = state.v[i];
    if (m.size() != values.size() || v.size() != values.size()) {
      throw std::invalid_argument("adam_step: moment shape mismatch for '" + params[i].first +
                                  "'");
    }
    const std::vector<float>* grad = tensor.has_grad() ? &tensor.grad() : nullptr;
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double g = grad ? static_cast<double>((*grad)[j]) : 0.0;
      const double mj = cfg.beta1 * static_cast<double>(m[j]) + (1.0 - cfg.beta1) * g;
      const double vj = cfg.beta2 * static_cast<double>(v[j]) + (1.0 - cfg.beta2) * g * g;
      m[j] = static_cast<float>(mj);
      v[j] = static_cast<float>(vj);
      const double update = lr * (mj / bc1) / (std::sqrt(vj / bc2) + cfg.eps);
      values[j] = static_cast<float>(static_cast<double>(values[j]) - update);
    }
  }
}

EarlyStopper::EarlyStopper(int patience) : patience_(patience) {
  if (patience < 1) throw std::invalid_argument("early stopping: patience must be >= 1");
}

bool EarlyStopper::record(double score) {
  epoch_ += 1;
  if (best_epoch_ == 0 || score > best_score_) {
    best_score_ = score;
    best_epoch_ = epoch_;
    stale_ = 0;
    improved_last_ = true;
    return false;
  }
  improved_last_ = false;
  stale_ += 1;
  return stale_ >= patience_;
}

PreparedData prepare_data(const std::vector<signals::Sample>& samples, signals::Target target,
                          const DataConfig& data_cfg, std::uint64_t seed) {
  data_cfg.validate();
  const signals::SplitIndex outer =
      signals::stratified_split(samples, target, data_cfg.test_fraction, seed);
  PreparedData out;
  out.test = gather(samples, outer.test);
  const std::vector<signals::Sample> pool = gather(samples, outer.train);
  const signals::SplitIndex inner =
      signals::stratified_split(pool, target, data_cfg.val_fraction, seed + 1);
  out.val = gather(pool, inner.test);
  std::vector<signals::Sample> base = gather(pool, inner.train);
  out.train =
      data_cfg.augment ? signals::augment_training_set(base, seed) : std::move(base);
  return out;
}

History train(HyperFuseNet<float>& model, const std::vector<signals::Sample>& train_set,
              const std::vector<signals::Sample>& val_set, const TrainConfig& cfg,
              signals::Target target) {
  cfg.validate();
  if (train_set.empty() || val_set.empty()) {
    throw std::invalid_argument("train: train and validation sets must be non-empty");
  }
  const int n = static_cast<int>(train_set.size());
  // A trailing batch of one sample cannot pass batch norm; it is
  // skipped (which samples land there changes with each shuffle).
  const int remainder = n % cfg.batch_size;
  const std::int64_t steps_per_epoch = n / cfg.batch_size + (remainder >= 2 ? 1 : 0);
  if (steps_per_epoch == 0) {
    throw std::invalid_argument("train: need at least 2 training samples");
  }
  const std::int64_t total_steps = steps_per_epoch * cfg.epochs;

  auto params = model.named_parameters();
  auto state_handles = model.named_state();
  AdamState adam;
  Rng rng(cfg.seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  History history;
  EarlyStopper stopper(cfg.patience);
  std::vector<std::vector<float>> best_state;
  std::int64_t step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::int64_t counted = 0;
    double last_lr = 0.0;
    for (int from = 0; from < n; from += cfg.batch_size) {
      const int count = std::min(cfg.batch_size, n - from);
      if (count < 2) break;
      const double lr = one_cycle_lr(step, total_steps, cfg);
      ModalBatch<float> batch = make_batch(train_set, order.data() + from, count);
      std::vector<int> targets = make_targets(train_set, order.data() + from, count, target);
      Tensor<float> loss = cross_entropy(model.forward(batch, true, &rng), targets);
      loss.backward();
      adam_step(params, adam, cfg, lr);
      for (auto& [name, tensor] : params) tensor.zero_grad();
      loss_sum += static_cast<double>(loss.item()) * count;
      counted += count;
      last_lr = lr;
      step += 1;
    }

    const EvalPass val = eval_pass(model, val_set, target, cfg.batch_size);
    const Metrics val_metrics =
        metrics_from_confusion(confusion_of(val_set, val.predictions, target));
    history.epochs.push_back({epoch, loss_sum / static_cast<double>(counted), val.loss,
                              val_metrics.f1_macro, last_lr});

    const bool stop = stopper.record(val_metrics.f1_macro);
    if (stopper.improved_last()) {
      best_state.clear();
      best_state.reserve(state_handles.size());
      for (const auto& [name, tensor] : state_handles) best_state.push_back(tensor.values());
    }
    if (stop) break;
  }

  history.best_epoch = stopper.best_epoch();
  for (std::size_t i = 0; i < state_handles.size(); ++i) {
    state_handles[i].second.values() = best_state[i];
  }
  return history;
}

Metrics evaluate(HyperFuseNet<float>& model, const std::vector<signals::Sample>& test_set,
                 signals::Target target) {
  if (test_set.empty()) throw std::invalid_argument("evaluate: empty test set");
  const EvalPass pass = eval_pass(model, test_set, target, 32);
  return metrics_from_confusion(confusion_of(test_set, pass.predictions, target));
}

LrSearchResult lr_search(const ModelConfig& model_cfg, const TrainConfig& cfg,
                         const DataConfig& data_cfg,
                         const std::vector<signals::Sample>& samples, signals::Target target,
                         int trials, int search_epochs) {
  cfg.validate();
  if (trials < 1) throw std::invalid_argument("lr_search: trials must be >= 1");
  if (!(cfg.lr_min > 0.0) || cfg.lr_min > cfg.lr_max) {
    throw std::invalid_argument("lr_search: empty learning-rate space");
  }

  Rng draw_rng(cfg.seed);
  std::vector<double> candidates;
  candidates.reserve(static_cast<std::size_t>(trials));
  const double log_lo = std::log(cfg.lr_min);
  const double log_hi = std::log(cfg.lr_max);
  for (int t = 0; t < trials; ++t) {
    candidates.push_back(std::exp(log_lo + draw_rng.uniform01() * (log_hi - log_lo)));
  }

  const PreparedData prep = prepare_data(samples, target, data_cfg, cfg.seed);
  TrainConfig short_cfg = cfg;
  short_cfg.epochs = std::min(cfg.epochs, std::max(2, search_epochs));
  short_cfg.patience = std::min(cfg.patience, short_cfg.epochs - 1);

  LrSearchResult result;
  for (double candidate : candidates) {
    Rng init_rng(cfg.seed);
    HyperFuseNet<float> model(model_cfg, init_rng);
    TrainConfig trial_cfg = short_cfg;
    trial_cfg.max_lr = candidate;
    const History h = train(model, prep.train, prep.val, trial_cfg, target);
    const double score = h.epochs[static_cast<std::size_t>(h.best_epoch - 1)].val_f1;
    result.trials.push_back({candidate, score});
    if (result.trials.size() == 1 || score > result.best_val_f1) {
      result.best_val_f1 = score;
      result.best_max_lr = candidate;
    }
  }
  return result;
}

RepeatedResult run_repeated(const ModelConfig& model_cfg, const TrainConfig& cfg,
                            const DataConfig& data_cfg,
                            const std::vector<signals::Sample>& samples, signals::Target target,
                            std::vector<HyperFuseNet<float>>* trained) {
  cfg.validate();
  const PreparedData prep = prepare_data(samples, target, data_cfg, cfg.seed);

  RepeatedResult result;
  std::vector<double> f1s;
  std::vector<double> accs;
  for (int k = 0; k < cfg.runs; ++k) {
    const std::uint64_t run_seed = cfg.seed + static_cast<std::uint64_t>(k);
    Rng init_rng(run_seed);
    HyperFuseNet<float> model(model_cfg, init_rng);
    TrainConfig run_cfg = cfg;
    run_cfg.seed = run_seed;
    History h = train(model, prep.train, prep.val, run_cfg, target);
    Metrics m = evaluate(model, prep.test, target);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        result.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
            m.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    }
    f1s.push_back(m.f1_macro);
    accs.push_back(m.accuracy);
    result.runs.push_back({run_seed, std::move(m), std::move(h)});
    if (trained != nullptr) trained->push_back(std::move(model));
  }

  auto mean_of = [](const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  };
  auto std_of = [](const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
  };
  result.f1_mean = mean_of(f1s);
  result.f1_std = std_of(f1s, result.f1_mean);
  result.acc_mean = mean_of(accs);
  result.acc_std = std_of(accs, result.acc_mean);
  return result;
}

}  // namespace hfn::training
