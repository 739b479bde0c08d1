// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: synth, preprocess, train, search, eval.
// run_cli takes the argument list without the program name and
// returns the process exit code: 0 success, 1 internal error, 2 bad
// input or configuration.

#pragma once

#include <string>
#include <vector>

namespace hfn::cli {

int run_cli(const std::vector<std::string>& args);

}  // namespace hfn::cli
