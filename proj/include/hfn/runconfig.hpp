// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration files: flat "key = value" lines grouped under
// [model], [train], and [data] sections, with the classification
// target at top level. Every key is optional (defaults come from the
// config structs); unknown keys and sections are rejected by name, so
// a typo cannot silently fall back to a default.
//
//   target = arousal
//
//   [model]
//   n = 2
//   scale = 8
//
//   [train]
//   max_lr = 0.003
//   seed = 7
//
//   [data]
//   dir = out/processed
//   augment = true
//
// '#' starts a comment; blank lines are ignored.

#pragma once

#include <string>

#include "hfn/model.hpp"
#include "hfn/signals.hpp"
#include "hfn/training.hpp"

namespace hfn::runconfig {

struct RunConfig {
  ModelConfig model;
  training::TrainConfig train;
  training::DataConfig data;
  std::string data_dir;  // [data] dir; empty = take it from the command line
  signals::Target target = signals::Target::kArousal;
};

// Parses config text; errors carry the offending key, section, or
// line. Struct-level validation is left to the consumer.
RunConfig parse_text(const std::string& text);

RunConfig load_file(const std::string& path);

}  // namespace hfn::runconfig
