// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// On-disk dataset layout: a root directory holding manifest.json (the
// record list with sampling rates, channel names, and label ratings)
// and one subdirectory per record with a CSV per modality (eeg.csv,
// ecg.csv, gsr.csv, eye.csv, and gsr_pre.csv when present). Each CSV
// starts with a channel-name header row followed by one row per time
// sample; values are decimal text that round-trips IEEE doubles
// exactly. A processed dataset uses the same layout with
// "processed": true and fixed-length 10 s segment records.

#pragma once

#include <string>
#include <vector>

#include "hfn/signals.hpp"

namespace hfn::dataset {

struct Dataset {
  bool processed = false;
  std::vector<signals::TrialRecord> records;
};

// Write manifest plus per-record CSVs under root, creating directories
// as needed. Every modality must carry one channel name per row.
// Deterministic: identical records produce byte-identical files.
void write_dataset(const std::string& root, const std::vector<signals::TrialRecord>& records,
                   bool processed);

// Read a dataset written by write_dataset. Malformed CSV cells or row
// shapes raise errors naming the file and row; channel names must
// agree between each CSV header and the manifest.
Dataset read_dataset(const std::string& root);

// Load a processed dataset directly into training samples, one per
// stored segment. Throws if the manifest is not marked processed.
std::vector<signals::Sample> load_samples(const std::string& root);

}  // namespace hfn::dataset
