// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Signal preprocessing, segmentation, augmentation, splitting, and
// synthetic trial generation. A raw trial carries four modalities at
// their native rates (EEG/ECG/GSR at 256 Hz, eye tracking at 60 Hz);
// preprocessing brings the physiological channels to 128 Hz and the
// eye channels to four two-eye-averaged fields, and segmentation cuts
// the final 30 s into three fixed-length 10 s samples.
//
// Everything here is deterministic: filters are pure functions, and
// every randomized step (splits, augmentation, synthesis) takes an
// explicit seed or generator.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hfn/rng.hpp"

namespace hfn::signals {

// Sampling rates and segment geometry.
inline constexpr double kPhysHz = 128.0;   // physiological rate after downsampling
inline constexpr double kEyeHz = 60.0;     // eye-tracker rate (never resampled)
inline constexpr double kMainsHz = 50.0;   // notch target
inline constexpr double kNotchQ = 30.0;
inline constexpr int kSegmentsPerTrial = 3;
inline constexpr int kPhysSegmentLen = 1280;  // 10 s at 128 Hz
inline constexpr int kEyeSegmentLen = 600;    // 10 s at 60 Hz
inline constexpr int kEegChannels = 10;
inline constexpr int kEcgChannels = 3;
inline constexpr int kGsrChannels = 1;
inline constexpr int kEyeFields = 4;
inline constexpr double kEyeSentinel = -1.0;  // blink marker, preserved verbatim

// The ten electrodes kept after channel selection, in output row order.
extern const std::array<std::string, 10> kSelectedEegChannels;

// Row-major multichannel time series. channel_names is either empty or
// holds exactly one name per row.
struct SignalMatrix {
  std::vector<std::string> channel_names;
  int channels = 0;
  int samples = 0;
  std::vector<double> data;  // channels x samples, row-major

  SignalMatrix() = default;
  SignalMatrix(int channels_, int samples_)
      : channels(channels_),
        samples(samples_),
        data(static_cast<std::size_t>(channels_) * static_cast<std::size_t>(samples_), 0.0) {}

  double& at(int c, int t) { return data[static_cast<std::size_t>(c) * samples + t]; }
  double at(int c, int t) const { return data[static_cast<std::size_t>(c) * samples + t]; }
  double* row(int c) { return data.data() + static_cast<std::size_t>(c) * samples; }
  const double* row(int c) const { return data.data() + static_cast<std::size_t>(c) * samples; }
};

// One recorded trial. Ratings are 9-point self-assessment integers;
// map_rating turns them into the three classes. Eye samples may hold
// the -1 blink sentinel, which every stage preserves untouched.
struct TrialRecord {
  std::string name;
  SignalMatrix eeg;      // raw: 32 x T at eeg_hz; processed: 10 x T at 128 Hz
  SignalMatrix ecg;      // 3 x T
  SignalMatrix gsr;      // 1 x T
  SignalMatrix gsr_pre;  // 1 x T_pre, pre-stimulus baseline material
  SignalMatrix eye;      // raw: 8 x T_eye (left/right pairs); processed: 4 x T_eye
  double eeg_hz = 256.0;
  double ecg_hz = 256.0;
  double gsr_hz = 256.0;
  double eye_hz = 60.0;
  int arousal_rating = 5;  // 1..9
  int valence_rating = 5;  // 1..9
};

// One fixed-length training example: 10 s windows, channel-major float
// layout (channel c sample t lives at index c*len + t).
struct Sample {
  std::vector<float> eeg;  // 10 x 1280
  std::vector<float> ecg;  // 3 x 1280
  std::vector<float> gsr;  // 1 x 1280
  std::vector<float> eye;  // 4 x 600
  int arousal_class = 0;   // 0..2
  int valence_class = 0;   // 0..2
};

// Which label a model predicts; splits stratify on the same label.
enum class Target { kArousal, kValence };

const char* target_name(Target target);   // "arousal" / "valence"
Target parse_target(const std::string& s);  // inverse, throws on anything else
int class_of(const Sample& s, Target target);

// Index partition over a sample vector. val is empty unless a
// validation carve-out was requested separately.
struct SplitIndex {
  std::vector<int> train;
  std::vector<int> test;
  std::vector<int> val;
  std::array<int, 3> class_total{};  // per-class sizes of the full input
  std::array<int, 3> class_test{};   // per-class test allocation
};

// --- Filtering and per-channel transforms -------------------------------
//
// Filter wrappers apply the named design to every channel with
// zero-phase (forward-backward) passes; length and names are preserved.

SignalMatrix bandpass(const SignalMatrix& x, double low_hz, double high_hz, double fs);
SignalMatrix lowpass(const SignalMatrix& x, double cut_hz, double fs);
SignalMatrix notch(const SignalMatrix& x, double freq_hz, double fs);

// Anti-alias low-pass at 0.45*to_hz, then keep every k-th sample where
// k = from_hz/to_hz must be a whole number. Output length is
// floor(T*to_hz/from_hz). Upsampling and fractional factors throw.
SignalMatrix resample(const SignalMatrix& x, double from_hz, double to_hz);

// Subtract the instantaneous cross-channel mean from every channel.
// Needs at least two channels.
SignalMatrix average_reference(const SignalMatrix& eeg);

// Reorder rows to kSelectedEegChannels using the input's channel
// names; throws naming the electrode if one is absent.
SignalMatrix select_channels(const SignalMatrix& eeg);

// Subtract the mean of the final 200 ms of pre_trial (ceil(0.2*fs)
// samples) from every sample of gsr.
SignalMatrix baseline_correct_gsr(const SignalMatrix& gsr, const SignalMatrix& pre_trial,
                                  double fs);

// Collapse left/right eye pairs (8 rows: pupil, gaze-x, gaze-y,
// distance, each left then right) to their per-field means (4 rows).
// Wherever either eye reads the -1 sentinel the output is -1.
SignalMatrix average_eyes(const SignalMatrix& raw_eye);

// Full preprocessing: EEG average reference -> 1-45 Hz band-pass ->
// 50 Hz notch -> downsample to 128 Hz -> channel selection; ECG
// 0.5-45 Hz band-pass -> notch -> downsample; GSR 60 Hz low-pass ->
// notch -> downsample -> baseline correction against the identically
// processed pre-trial recording; eye two-eye averaging only.
TrialRecord preprocess_trial(const TrialRecord& raw);

// --- Segmentation and labels --------------------------------------------

// Map a 9-point rating onto {0,1,2} by equal-width bins 1-3/4-6/7-9.
int map_rating(int rating);

// Cut the last 30 s of a processed trial into three consecutive 10 s
// samples (no overlap, anchored at the end), copying the trial's
// mapped labels onto each.
std::vector<Sample> segment_trial(const TrialRecord& processed);

// The same three windows as full-precision records named
// "<trial>_seg<k>", for writing a processed dataset to disk. The
// applied baseline makes gsr_pre moot, so segments drop it.
std::vector<TrialRecord> segment_records(const TrialRecord& processed);

// Flatten a record holding exactly one 10 s segment into a Sample.
// sample_from_segment(segment_records(t)[k]) == segment_trial(t)[k].
Sample sample_from_segment(const TrialRecord& segment);

// --- Splitting and augmentation -----------------------------------------

// Stratified holdout: per-class test quotas are the largest-remainder
// apportionment of round(N*test_fraction) over the class sizes, so
// each class contributes round(count*test_fraction) give or take one.
// Every class must have at least two samples. Deterministic by seed.
SplitIndex stratified_split(const std::vector<Sample>& samples, Target target,
                            double test_fraction, std::uint64_t seed);

// 30 augmented copies of one sample: 10 rounds, each drawing a factor
// from [0.7, 0.8] and one from [1.2, 1.3], emitting a noisy unscaled
// copy plus the two noisy scaled copies. Noise is zero-mean Gaussian
// per modality with sigma = sqrt(P / 10^0.5) where P is the mean
// square of the copy being noised, i.e. every output sits 5 dB above
// its own noise. Eye sentinel entries are neither scaled nor noised
// and contribute nothing to P.
std::vector<Sample> augment(const Sample& s, Rng& rng);

// Originals followed by their 30 augmented copies, sample by sample
// (31 outputs per input). Each input augments under its own generator
// seeded with seed ^ index, so the result is independent of any
// parallel scheduling of the per-sample work.
std::vector<Sample> augment_training_set(const std::vector<Sample>& train, std::uint64_t seed);

// --- Synthetic data -------------------------------------------------------

// Balanced synthetic trials (class = trial index mod 3, 60 s each)
// with the class encoded as the amplitude of a modality-specific tone:
// 10 Hz in EEG, 8 Hz in ECG, 2 Hz riding on a 5.0 DC level in GSR,
// 0.3 Hz in the eye fields. separability scales how far apart the
// class amplitudes sit. Eye channels carry occasional multi-sample
// blinks (-1 in all four fields of one eye). Ratings are 2/5/8 for
// classes 0/1/2 on both scales. Deterministic by seed; needs
// n_trials >= 6 so every class appears at least twice.
std::vector<TrialRecord> synthesize_dataset(std::uint64_t seed, int n_trials,
                                            double class_separability);

}  // namespace hfn::signals
