// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// HyperFuseNet: four real-valued encoder branches (one per modality,
// fully-connected blocks with batch norm and ReLU) whose latent outputs
// are concatenated and passed through a hypercomplex fusion head of
// four PHM layers with widths halved at each step, then dropout and a
// final fully-connected classifier.
//
// Branch latents are concatenated in the fixed order eeg, ecg, gsr,
// eye. Inputs are raw signals flattened channel-major (all samples of
// channel 0, then channel 1, ...).

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hfn/layers.hpp"
#include "hfn/ops.hpp"
#include "hfn/rng.hpp"
#include "hfn/tensor.hpp"

namespace hfn {

struct ModelConfig {
  int n = 4;          // hypercomplex dimension of the fusion head
  int scale = 1;      // width divisor for desk-scale runs
  double dropout = 0.25;
  int classes = 3;

  // Branch widths and depths at scale 1.
  int eeg_width = 1024, ecg_width = 512, gsr_width = 128, eye_width = 128;
  int eeg_depth = 3, ecg_depth = 3, gsr_depth = 2, eye_depth = 3;
  int fusion_depth = 4;

  // Flattened per-modality input lengths (channels x samples).
  int eeg_len = 12800;  // 10 x 1280
  int ecg_len = 3840;   // 3 x 1280
  int gsr_len = 1280;   // 1 x 1280
  int eye_len = 2400;   // 4 x 600

  int scaled(int width) const { return width / scale; }

  int concat_width() const {
    return scaled(eeg_width) + scaled(ecg_width) + scaled(gsr_width) + scaled(eye_width);
  }

  // Fusion widths starting at the concat width and halving per layer:
  // entry 0 is the head input, entry fusion_depth is the width fed to
  // the output classifier.
  std::vector<int> fusion_widths() const {
    std::vector<int> w{concat_width()};
    for (int i = 0; i < fusion_depth; ++i) w.push_back(w.back() / 2);
    return w;
  }

  void validate() const {
    if (n < 1) throw std::invalid_argument("model config: n must be >= 1");
    if (scale < 1) throw std::invalid_argument("model config: scale must be >= 1");
    if (classes < 2) throw std::invalid_argument("model config: need at least 2 classes");
    for (int w : {eeg_width, ecg_width, gsr_width, eye_width}) {
      if (w % scale != 0) {
        throw std::invalid_argument("model config: branch width " + std::to_string(w) +
                                    " is not divisible by scale " + std::to_string(scale));
      }
    }
    auto widths = fusion_widths();
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      if (widths[i] % 2 != 0) {
        throw std::invalid_argument("model config: fusion width " + std::to_string(widths[i]) +
                                    " cannot be halved evenly");
      }
      if (widths[i] % n != 0 || widths[i + 1] % n != 0) {
        throw std::invalid_argument("model config: fusion widths " + std::to_string(widths[i]) +
                                    "->" + std::to_string(widths[i + 1]) +
                                    " are not divisible by n = " + std::to_string(n));
      }
    }
    for (int len : {eeg_len, ecg_len, gsr_len, eye_len}) {
      if (len < 1) throw std::invalid_argument("model config: input lengths must be positive");
    }
  }
};

// One training example (or batch) split by modality.
template <typename T>
struct ModalBatch {
  Tensor<T> eeg, ecg, gsr, eye;
};

// Index of the largest entry; ties resolve to the lowest index.
template <typename T>
int argmax_lowest(const T* row, int n) {
  int best = 0;
  for (int j = 1; j < n; ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

namespace detail {

template <typename T>
struct Branch {
  std::vector<FcLayer<T>> fc;
  std::vector<BatchNorm<T>> bn;

  Branch(int input_len, int width, int depth, Rng& rng) {
    fc.emplace_back(input_len, width, rng);
    bn.emplace_back(width);
    for (int i = 1; i < depth; ++i) {
      fc.emplace_back(width, width, rng);
      bn.emplace_back(width);
    }
  }

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    Tensor<T> h = x;
    for (std::size_t i = 0; i < fc.size(); ++i) {
      h = relu(bn[i].forward(fc[i].forward(h), training));
    }
    return h;
  }
};

}  // namespace detail

template <typename T>
class HyperFuseNet {
 public:
  HyperFuseNet(const ModelConfig& config, Rng& rng) : cfg_(config), dropout_(config.dropout) {
    cfg_.validate();
    branches_.reserve(4);
    branches_.emplace_back(cfg_.eeg_len, cfg_.scaled(cfg_.eeg_width), cfg_.eeg_depth, rng);
    branches_.emplace_back(cfg_.ecg_len, cfg_.scaled(cfg_.ecg_width), cfg_.ecg_depth, rng);
    branches_.emplace_back(cfg_.gsr_len, cfg_.scaled(cfg_.gsr_width), cfg_.gsr_depth, rng);
    branches_.emplace_back(cfg_.eye_len, cfg_.scaled(cfg_.eye_width), cfg_.eye_depth, rng);
    const auto widths = cfg_.fusion_widths();
    for (int i = 0; i < cfg_.fusion_depth; ++i) {
      fusion_.emplace_back(cfg_.n, widths[i], widths[i + 1], rng);
      fusion_bn_.emplace_back(widths[i + 1]);
    }
    head_.emplace(widths.back(), cfg_.classes, rng);
  }

  const ModelConfig& config() const { return cfg_; }

  // Logits of shape [B, classes]. `rng` is only needed when training
  // with a nonzero dropout rate.
  Tensor<T> forward(const ModalBatch<T>& batch, bool training, Rng* rng = nullptr) {
    check_batch(batch);
    Tensor<T> latents[4] = {
        branches_[0].forward(batch.eeg, training),
        branches_[1].forward(batch.ecg, training),
        branches_[2].forward(batch.gsr, training),
        branches_[3].forward(batch.eye, training),
    };
    Tensor<T> h = concat<T>({latents[0], latents[1], latents[2], latents[3]}, 1);
    for (std::size_t i = 0; i < fusion_.size(); ++i) {
      h = relu(fusion_bn_[i].forward(fusion_[i].forward(h), training));
    }
    if (training && dropout_.rate > 0.0) {
      if (rng == nullptr) {
        throw std::invalid_argument("forward: training with dropout requires an rng");
      }
      h = dropout_.forward(h, true, *rng);
    }
    return head_->forward(h);
  }

  // Argmax class per row; ties resolve to the lowest class index.
  std::vector<int> predict(const ModalBatch<T>& batch) {
    NoGradGuard eval_guard;
    Tensor<T> logits = forward(batch, false);
    const int batch_size = logits.shape()[0];
    const int classes = logits.shape()[1];
    std::vector<int> out(batch_size);
    for (int i = 0; i < batch_size; ++i) {
      out[i] = argmax_lowest(logits.values().data() + static_cast<std::size_t>(i) * classes,
                             classes);
    }
    return out;
  }

  // Trainable parameters in a stable order.
  std::vector<std::pair<std::string, Tensor<T>>> named_parameters() {
    std::vector<std::pair<std::string, Tensor<T>>> out;
    static const char* branch_names[4] = {"eeg", "ecg", "gsr", "eye"};
    for (int m = 0; m < 4; ++m) {
      auto& br = branches_[m];
      for (std::size_t i = 0; i < br.fc.size(); ++i) {
        const std::string prefix = std::string(branch_names[m]) + ".fc" + std::to_string(i);
        out.emplace_back(prefix + ".weight", br.fc[i].weight);
        out.emplace_back(prefix + ".bias", br.fc[i].bias);
        const std::string bn_prefix = std::string(branch_names[m]) + ".bn" + std::to_string(i);
        out.emplace_back(bn_prefix + ".gamma", br.bn[i].gamma);
        out.emplace_back(bn_prefix + ".beta", br.bn[i].beta);
      }
    }
    for (std::size_t i = 0; i < fusion_.size(); ++i) {
      const std::string prefix = "fusion.phm" + std::to_string(i);
      for (int j = 0; j < cfg_.n; ++j) {
        out.emplace_back(prefix + ".a" + std::to_string(j), fusion_[i].a[j]);
      }
      for (int j = 0; j < cfg_.n; ++j) {
        out.emplace_back(prefix + ".f" + std::to_string(j), fusion_[i].f[j]);
      }
      out.emplace_back(prefix + ".bias", fusion_[i].bias);
      const std::string bn_prefix = "fusion.bn" + std::to_string(i);
      out.emplace_back(bn_prefix + ".gamma", fusion_bn_[i].gamma);
      out.emplace_back(bn_prefix + ".beta", fusion_bn_[i].beta);
    }
    out.emplace_back("head.weight", head_->weight);
    out.emplace_back("head.bias", head_->bias);
    return out;
  }

  // Parameters plus batch-norm running statistics; this is what a
  // checkpoint stores and what a training snapshot must capture.
  std::vector<std::pair<std::string, Tensor<T>>> named_state() {
    auto out = named_parameters();
    static const char* branch_names[4] = {"eeg", "ecg", "gsr", "eye"};
    for (int m = 0; m < 4; ++m) {
      auto& br = branches_[m];
      for (std::size_t i = 0; i < br.bn.size(); ++i) {
        const std::string prefix = std::string(branch_names[m]) + ".bn" + std::to_string(i);
        out.emplace_back(prefix + ".running_mean", br.bn[i].running_mean);
        out.emplace_back(prefix + ".running_var", br.bn[i].running_var);
      }
    }
    for (std::size_t i = 0; i < fusion_bn_.size(); ++i) {
      const std::string prefix = "fusion.bn" + std::to_string(i);
      out.emplace_back(prefix + ".running_mean", fusion_bn_[i].running_mean);
      out.emplace_back(prefix + ".running_var", fusion_bn_[i].running_var);
    }
    return out;
  }

  std::int64_t param_count() {
    std::int64_t total = 0;
    for (auto& [name, t] : named_parameters()) total += t.numel();
    return total;
  }

  // Sum over fusion PHM layers of stored weight scalars (A and F, no bias).
  std::int64_t fusion_weight_param_count() const {
    std::int64_t total = 0;
    for (const auto& layer : fusion_) {
      for (const auto& t : layer.a) total += t.numel();
      for (const auto& t : layer.f) total += t.numel();
    }
    return total;
  }

 private:
  void check_modality(const Tensor<T>& t, const char* name, int expected_len, int batch) const {
    if (!t.defined()) {
      throw std::invalid_argument(std::string("forward: missing modality '") + name + "'");
    }
    if (t.shape().size() != 2 || t.shape()[1] != expected_len) {
      throw std::invalid_argument(std::string("forward: modality '") + name + "' has shape " +
                                  shape_string(t.shape()) + ", expected (B," +
                                  std::to_string(expected_len) + ")");
    }
    if (t.shape()[0] != batch) {
      throw std::invalid_argument(std::string("forward: modality '") + name +
                                  "' batch size differs");
    }
  }

  void check_batch(const ModalBatch<T>& batch) const {
    if (!batch.eeg.defined()) {
      throw std::invalid_argument("forward: missing modality 'eeg'");
    }
    const int b = batch.eeg.shape().empty() ? 0 : batch.eeg.shape()[0];
    check_modality(batch.eeg, "eeg", cfg_.eeg_len, b);
    check_modality(batch.ecg, "ecg", cfg_.ecg_len, b);
    check_modality(batch.gsr, "gsr", cfg_.gsr_len, b);
    check_modality(batch.eye, "eye", cfg_.eye_len, b);
  }

  ModelConfig cfg_;
  std::vector<detail::Branch<T>> branches_;  // eeg, ecg, gsr, eye
  std::vector<PhmLayer<T>> fusion_;
  std::vector<BatchNorm<T>> fusion_bn_;
  Dropout<T> dropout_;
  std::optional<FcLayer<T>> head_;
};

}  // namespace hfn
