// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary model checkpoints: magic "HFN1", a format version, the model
// configuration, every named state tensor as raw little-endian 32-bit
// floats, and training metadata. Loading reconstructs the model and
// restores the tensors bitwise.

#pragma once

#include <cstdint>
#include <string>

#include "hfn/model.hpp"
#include "hfn/signals.hpp"
#include "hfn/training.hpp"

namespace hfn::checkpoint {

inline constexpr std::uint32_t kVersion = 1;

// Provenance stored beside the tensors. The split fields record how
// the training data was partitioned, so evaluation can rebuild the
// exact test split the stored metrics refer to.
struct Metadata {
  std::uint64_t seed = 0;  // training seed of this run
  int best_epoch = 0;
  training::Metrics metrics;  // test metrics of this run

  std::uint64_t split_seed = 0;  // base seed of the data preparation
  double test_fraction = 0.20;
  double val_fraction = 0.10;
  signals::Target target = signals::Target::kArousal;
};

void save(const std::string& path, HyperFuseNet<float>& model, const Metadata& meta);

struct Loaded {
  ModelConfig config;
  Metadata meta;
  HyperFuseNet<float> model;
};

Loaded load(const std::string& path);

}  // namespace hfn::checkpoint
