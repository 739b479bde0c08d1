// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include "hfn/cli.hpp"

int main(int argc, char** argv) {
  return hfn::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
