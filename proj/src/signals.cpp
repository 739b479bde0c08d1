// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "hfn/signals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "hfn/filters.hpp"

namespace hfn::signals {

const std::array<std::string, 10> kSelectedEegChannels = {
    "F3", "F4", "F7", "F8", "FC5", "FC6", "T7", "T8", "P7", "P8"};

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Zero-phase filter every channel independently.
SignalMatrix apply_sos(const SignalMatrix& x, const filters::Sos& sos) {
  SignalMatrix out = x;
  std::vector<double> ch(static_cast<std::size_t>(x.samples));
  for (int c = 0; c < x.channels; ++c) {
    ch.assign(x.row(c), x.row(c) + x.samples);
    const std::vector<double> y = filters::filtfilt(sos, ch);
    std::copy(y.begin(), y.end(), out.row(c));
  }
  return out;
}

}  // namespace

const char* target_name(Target target) {
  return target == Target::kArousal ? "arousal" : "valence";
}

Target parse_target(const std::string& s) {
  if (s == "arousal") return Target::kArousal;
  if (s == "valence") return Target::kValence;
  throw std::invalid_argument("unknown target '" + s + "'; expected arousal or valence");
}

int class_of(const Sample& s, Target target) {
  return target == Target::kArousal ? s.arousal_class : s.valence_class;
}

SignalMatrix bandpass(const SignalMatrix& x, double low_hz, double high_hz, double fs) {
  return apply_sos(x, filters::butter_bandpass(5, low_hz, high_hz, fs));
}

SignalMatrix lowpass(const SignalMatrix& x, double cut_hz, double fs) {
  return apply_sos(x, filters::butter_lowpass(5, cut_hz, fs));
}

SignalMatrix notch(const SignalMatrix& x, double freq_hz, double fs) {
  return apply_sos(x, filters::iir_notch(freq_hz, kNotchQ, fs));
}

SignalMatrix resample(const SignalMatrix& x, double from_hz, double to_hz) {
  if (!(to_hz > 0.0) || from_hz < to_hz) {
    throw std::invalid_argument("resample only downsamples: requested " + fmt(from_hz) +
                                " Hz -> " + fmt(to_hz) + " Hz");
  }
  const double ratio = from_hz / to_hz;
  const int factor = static_cast<int>(std::lround(ratio));
  if (std::fabs(ratio - factor) > 1e-9) {
    throw std::invalid_argument("resample needs a whole-number rate ratio, got " + fmt(from_hz) +
                                "/" + fmt(to_hz) + " = " + fmt(ratio));
  }
  const SignalMatrix filtered = apply_sos(x, filters::butter_lowpass(5, 0.45 * to_hz, from_hz));
  const int out_len = x.samples / factor;
  SignalMatrix out(x.channels, out_len);
  out.channel_names = x.channel_names;
  for (int c = 0; c < x.channels; ++c) {
    const double* src = filtered.row(c);
    double* dst = out.row(c);
    for (int t = 0; t < out_len; ++t) dst[t] = src[static_cast<std::size_t>(t) * factor];
  }
  return out;
}

SignalMatrix average_reference(const SignalMatrix& eeg) {
  if (eeg.channels < 2) {
    throw std::invalid_argument("average reference needs at least 2 channels, got " +
                                std::to_string(eeg.channels));
  }
  SignalMatrix out = eeg;
  for (int t = 0; t < eeg.samples; ++t) {
    double mean = 0.0;
    for (int c = 0; c < eeg.channels; ++c) mean += eeg.at(c, t);
    mean /= eeg.channels;
    for (int c = 0; c < eeg.channels; ++c) out.at(c, t) -= mean;
  }
  return out;
}

SignalMatrix select_channels(const SignalMatrix& eeg) {
  if (static_cast<int>(eeg.channel_names.size()) != eeg.channels) {
    throw std::invalid_argument("channel selection needs one name per row, got " +
                                std::to_string(eeg.channel_names.size()) + " names for " +
                                std::to_string(eeg.channels) + " rows");
  }
  SignalMatrix out(static_cast<int>(kSelectedEegChannels.size()), eeg.samples);
  for (std::size_t i = 0; i < kSelectedEegChannels.size(); ++i) {
    const std::string& want = kSelectedEegChannels[i];
    const auto it = std::find(eeg.channel_names.begin(), eeg.channel_names.end(), want);
    if (it == eeg.channel_names.end()) {
      throw std::invalid_argument("channel " + want + " not present in EEG input");
    }
    const int src = static_cast<int>(it - eeg.channel_names.begin());
    std::copy(eeg.row(src), eeg.row(src) + eeg.samples, out.row(static_cast<int>(i)));
    out.channel_names.push_back(want);
  }
  return out;
}

SignalMatrix baseline_correct_gsr(const SignalMatrix& gsr, const SignalMatrix& pre_trial,
                                  double fs) {
  const int window = static_cast<int>(std::ceil(0.2 * fs));
  if (pre_trial.channels < 1 || pre_trial.samples < window) {
    throw std::invalid_argument("pre-trial GSR holds " + std::to_string(pre_trial.samples) +
                                " samples; the 200 ms baseline at " + fmt(fs) + " Hz needs " +
                                std::to_string(window));
  }
  double mean = 0.0;
  for (int t = pre_trial.samples - window; t < pre_trial.samples; ++t) mean += pre_trial.at(0, t);
  mean /= window;
  SignalMatrix out = gsr;
  for (double& v : out.data) v -= mean;
  return out;
}

SignalMatrix average_eyes(const SignalMatrix& raw_eye) {
  if (raw_eye.channels != 2 * kEyeFields) {
    throw std::invalid_argument("two-eye averaging expects " + std::to_string(2 * kEyeFields) +
                                " rows (left/right per field), got " +
                                std::to_string(raw_eye.channels));
  }
  SignalMatrix out(kEyeFields, raw_eye.samples);
  out.channel_names = {"pupil", "gaze_x", "gaze_y", "eye_distance"};
  for (int f = 0; f < kEyeFields; ++f) {
    const double* left = raw_eye.row(2 * f);
    const double* right = raw_eye.row(2 * f + 1);
    double* dst = out.row(f);
    for (int t = 0; t < raw_eye.samples; ++t) {
      dst[t] = (left[t] == kEyeSentinel || right[t] == kEyeSentinel) ? kEyeSentinel
                                                                     : 0.5 * (left[t] + right[t]);
    }
  }
  return out;
}

TrialRecord preprocess_trial(const TrialRecord& raw) {
  TrialRecord out;
  out.name = raw.name;
  out.arousal_rating = raw.arousal_rating;
  out.valence_rating = raw.valence_rating;

  SignalMatrix eeg = average_reference(raw.eeg);
  eeg = bandpass(eeg, 1.0, 45.0, raw.eeg_hz);
  eeg = notch(eeg, kMainsHz, raw.eeg_hz);
  eeg = resample(eeg, raw.eeg_hz, kPhysHz);
  out.eeg = select_channels(eeg);
  out.eeg_hz = kPhysHz;

  SignalMatrix ecg = bandpass(raw.ecg, 0.5, 45.0, raw.ecg_hz);
  ecg = notch(ecg, kMainsHz, raw.ecg_hz);
  out.ecg = resample(ecg, raw.ecg_hz, kPhysHz);
  out.ecg_hz = kPhysHz;

  const auto gsr_chain = [&](const SignalMatrix& g) {
    SignalMatrix y = lowpass(g, 60.0, raw.gsr_hz);
    y = notch(y, kMainsHz, raw.gsr_hz);
    return resample(y, raw.gsr_hz, kPhysHz);
  };
  SignalMatrix gsr = gsr_chain(raw.gsr);
  SignalMatrix pre = gsr_chain(raw.gsr_pre);
  out.gsr = baseline_correct_gsr(gsr, pre, kPhysHz);
  out.gsr_pre = std::move(pre);
  out.gsr_hz = kPhysHz;

  out.eye = average_eyes(raw.eye);
  out.eye_hz = raw.eye_hz;
  return out;
}

int map_rating(int rating) {
  if (rating < 1 || rating > 9) {
    throw std::invalid_argument("rating " + std::to_string(rating) + " outside [1, 9]");
  }
  return (rating - 1) / 3;
}

namespace {

void check_modality(const std::string& trial, const char* mod, const SignalMatrix& m,
                    int channels, double hz, double want_hz, int need, bool exact) {
  if (m.channels != channels) {
    throw std::invalid_argument(std::string(mod) + " of trial " + trial + " has " +
                                std::to_string(m.channels) + " channels; expected " +
                                std::to_string(channels) + " (preprocessed input)");
  }
  if (hz != want_hz) {
    throw std::invalid_argument(std::string(mod) + " of trial " + trial + " is at " + fmt(hz) +
                                " Hz; expected " + fmt(want_hz));
  }
  if (exact ? (m.samples != need) : (m.samples < need)) {
    throw std::invalid_argument(std::string(mod) + " of trial " + trial + " holds " +
                                std::to_string(m.samples) + " samples (" +
                                fmt(m.samples / want_hz) + " s); " +
                                (exact ? "one segment holds exactly " : "the final 30 s need ") +
                                std::to_string(need));
  }
}

// exact: the record is a single stored segment; otherwise it must
// cover at least the three windows.
void check_processed(const TrialRecord& tr, bool exact) {
  const int mult = exact ? 1 : kSegmentsPerTrial;
  check_modality(tr.name, "eeg", tr.eeg, kEegChannels, tr.eeg_hz, kPhysHz,
                 mult * kPhysSegmentLen, exact);
  check_modality(tr.name, "ecg", tr.ecg, kEcgChannels, tr.ecg_hz, kPhysHz,
                 mult * kPhysSegmentLen, exact);
  check_modality(tr.name, "gsr", tr.gsr, kGsrChannels, tr.gsr_hz, kPhysHz,
                 mult * kPhysSegmentLen, exact);
  check_modality(tr.name, "eye", tr.eye, kEyeFields, tr.eye_hz, kEyeHz, mult * kEyeSegmentLen,
                 exact);
}

SignalMatrix slice(const SignalMatrix& m, int start, int len) {
  SignalMatrix out(m.channels, len);
  out.channel_names = m.channel_names;
  for (int c = 0; c < m.channels; ++c) {
    std::copy(m.row(c) + start, m.row(c) + start + len, out.row(c));
  }
  return out;
}

}  // namespace

std::vector<Sample> segment_trial(const TrialRecord& processed) {
  check_processed(processed, false);
  const int phys_need = kSegmentsPerTrial * kPhysSegmentLen;
  const int eye_need = kSegmentsPerTrial * kEyeSegmentLen;

  const auto window = [](const SignalMatrix& m, int start, int len) {
    std::vector<float> v(static_cast<std::size_t>(m.channels) * len);
    for (int c = 0; c < m.channels; ++c) {
      const double* src = m.row(c) + start;
      float* dst = v.data() + static_cast<std::size_t>(c) * len;
      for (int t = 0; t < len; ++t) dst[t] = static_cast<float>(src[t]);
    }
    return v;
  };

  std::vector<Sample> out(kSegmentsPerTrial);
  for (int k = 0; k < kSegmentsPerTrial; ++k) {
    Sample& s = out[k];
    s.arousal_class = map_rating(processed.arousal_rating);
    s.valence_class = map_rating(processed.valence_rating);
    s.eeg = window(processed.eeg, processed.eeg.samples - phys_need + k * kPhysSegmentLen,
                   kPhysSegmentLen);
    s.ecg = window(processed.ecg, processed.ecg.samples - phys_need + k * kPhysSegmentLen,
                   kPhysSegmentLen);
    s.gsr = window(processed.gsr, processed.gsr.samples - phys_need + k * kPhysSegmentLen,
                   kPhysSegmentLen);
    s.eye = window(processed.eye, processed.eye.samples - eye_need + k * kEyeSegmentLen,
                   kEyeSegmentLen);
  }
  return out;
}

std::vector<TrialRecord> segment_records(const TrialRecord& processed) {
  check_processed(processed, false);
  const int phys_need = kSegmentsPerTrial * kPhysSegmentLen;
  const int eye_need = kSegmentsPerTrial * kEyeSegmentLen;
  std::vector<TrialRecord> out(kSegmentsPerTrial);
  for (int k = 0; k < kSegmentsPerTrial; ++k) {
    TrialRecord& seg = out[k];
    seg.name = processed.name + "_seg" + std::to_string(k);
    seg.arousal_rating = processed.arousal_rating;
    seg.valence_rating = processed.valence_rating;
    seg.eeg_hz = seg.ecg_hz = seg.gsr_hz = kPhysHz;
    seg.eye_hz = kEyeHz;
    seg.eeg = slice(processed.eeg, processed.eeg.samples - phys_need + k * kPhysSegmentLen,
                    kPhysSegmentLen);
    seg.ecg = slice(processed.ecg, processed.ecg.samples - phys_need + k * kPhysSegmentLen,
                    kPhysSegmentLen);
    seg.gsr = slice(processed.gsr, processed.gsr.samples - phys_need + k * kPhysSegmentLen,
                    kPhysSegmentLen);
    seg.eye = slice(processed.eye, processed.eye.samples - eye_need + k * kEyeSegmentLen,
                    kEyeSegmentLen);
  }
  return out;
}

Sample sample_from_segment(const TrialRecord& segment) {
  check_processed(segment, true);
  const auto flat = [](const SignalMatrix& m) {
    std::vector<float> v(m.data.size());
    for (std::size_t i = 0; i < m.data.size(); ++i) v[i] = static_cast<float>(m.data[i]);
    return v;
  };
  Sample s;
  s.arousal_class = map_rating(segment.arousal_rating);
  s.valence_class = map_rating(segment.valence_rating);
  s.eeg = flat(segment.eeg);
  s.ecg = flat(segment.ecg);
  s.gsr = flat(segment.gsr);
  s.eye = flat(segment.eye);
  return s;
}

SplitIndex stratified_split(const std::vector<Sample>& samples, Target target,
                            double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie in (0, 1), got " + fmt(test_fraction));
  }
  std::array<std::vector<int>, 3> by_class;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    by_class[class_of(samples[i], target)].push_back(static_cast<int>(i));
  }

  SplitIndex out;
  for (int c = 0; c < 3; ++c) {
    out.class_total[c] = static_cast<int>(by_class[c].size());
    if (out.class_total[c] < 2) {
      throw std::invalid_argument("class " + std::to_string(c) + " has " +
                                  std::to_string(out.class_total[c]) +
                                  " sample(s); a stratified split needs at least 2 per class");
    }
  }

  // Largest-remainder apportionment of the overall test quota.
  const int want = static_cast<int>(std::lround(samples.size() * test_fraction));
  std::array<int, 3> alloc{};
  std::array<double, 3> remainder{};
  int allotted = 0;
  for (int c = 0; c < 3; ++c) {
    const double quota = out.class_total[c] * test_fraction;
    alloc[c] = static_cast<int>(std::floor(quota));
    remainder[c] = quota - alloc[c];
    allotted += alloc[c];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int extras = want - allotted, i = 0; extras > 0; i = (i + 1) % 3) {
    const int c = order[static_cast<std::size_t>(i)];
    if (alloc[c] < out.class_total[c]) {
      ++alloc[c];
      --extras;
    }
  }

  Rng rng(seed);
  for (int c = 0; c < 3; ++c) {
    std::vector<int> idx = by_class[c];
    rng.shuffle(idx);
    out.class_test[c] = alloc[c];
    out.test.insert(out.test.end(), idx.begin(), idx.begin() + alloc[c]);
    out.train.insert(out.train.end(), idx.begin() + alloc[c], idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

namespace {

// Scale one modality, then bury it in Gaussian noise sized from its
// own post-scaling power so the output sits 5 dB over the noise. Eye
// sentinels pass through untouched and consume no draws.
void scale_and_noise(const std::vector<float>& src, double factor, bool is_eye, Rng& rng,
                     std::vector<float>& dst) {
  static const double kSnrLinear = std::sqrt(10.0);  // 10^(5 dB / 10)
  const std::size_t n = src.size();
  std::vector<double> scaled(n);
  double power = 0.0;
  std::size_t live = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = src[i];
    if (is_eye && v == kEyeSentinel) {
      scaled[i] = v;
      continue;
    }
    scaled[i] = v * factor;
    power += scaled[i] * scaled[i];
    ++live;
  }
  const double sigma = live == 0 ? 0.0 : std::sqrt(power / static_cast<double>(live) / kSnrLinear);
  dst.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (is_eye && src[i] == static_cast<float>(kEyeSentinel)) {
      dst[i] = static_cast<float>(kEyeSentinel);
      continue;
    }
    dst[i] = static_cast<float>(scaled[i] + sigma * rng.gaussian());
  }
}

}  // namespace

std::vector<Sample> augment(const Sample& s, Rng& rng) {
  std::vector<Sample> out;
  out.reserve(30);
  for (int round = 0; round < 10; ++round) {
    const double factor_low = rng.uniform(0.7, 0.8);
    const double factor_high = rng.uniform(1.2, 1.3);
    for (const double factor : {1.0, factor_low, factor_high}) {
      Sample a;
      a.arousal_class = s.arousal_class;
      a.valence_class = s.valence_class;
      scale_and_noise(s.eeg, factor, false, rng, a.eeg);
      scale_and_noise(s.ecg, factor, false, rng, a.ecg);
      scale_and_noise(s.gsr, factor, false, rng, a.gsr);
      scale_and_noise(s.eye, factor, true, rng, a.eye);
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::vector<Sample> augment_training_set(const std::vector<Sample>& train, std::uint64_t seed) {
  std::vector<Sample> out;
  out.reserve(train.size() * 31);
  for (std::size_t i = 0; i < train.size(); ++i) {
    out.push_back(train[i]);
    Rng rng(seed ^ static_cast<std::uint64_t>(i));
    std::vector<Sample> aug = augment(train[i], rng);
    for (Sample& a : aug) out.push_back(std::move(a));
  }
  return out;
}

std::vector<TrialRecord> synthesize_dataset(std::uint64_t seed, int n_trials,
                                            double class_separability) {
  if (n_trials < 6) {
    throw std::invalid_argument("need at least 6 trials (two per class), got " +
                                std::to_string(n_trials));
  }
  static const std::array<std::string, 32> kEegNames = {
      "Fp1", "AF3", "F3",  "F7",  "FC5", "FC1", "C3",  "T7",  "CP5", "CP1", "P3",
      "P7",  "PO3", "O1",  "Oz",  "Pz",  "Fp2", "AF4", "Fz",  "F4",  "F8",  "FC6",
      "FC2", "Cz",  "C4",  "T8",  "CP6", "CP2", "P4",  "P8",  "PO4", "O2"};
  constexpr double kRawHz = 256.0;
  constexpr int kPhysLen = 60 * 256;
  constexpr int kEyeLen = 60 * 60;
  constexpr int kPreLen = 256;

  Rng rng(seed);
  std::vector<TrialRecord> out;
  out.reserve(static_cast<std::size_t>(n_trials));
  for (int i = 0; i < n_trials; ++i) {
    const int k = i % 3;
    const double amp = 1.0 + class_separability * k;
    TrialRecord tr;
    char name[24];
    std::snprintf(name, sizeof name, "trial_%03d", i);
    tr.name = name;
    tr.arousal_rating = tr.valence_rating = 2 + 3 * k;

    tr.eeg = SignalMatrix(32, kPhysLen);
    tr.eeg.channel_names.assign(kEegNames.begin(), kEegNames.end());
    for (int c = 0; c < 32; ++c) {
      const double phase = rng.uniform(0.0, kTwoPi);
      double* row = tr.eeg.row(c);
      for (int t = 0; t < kPhysLen; ++t) {
        row[t] = amp * std::sin(kTwoPi * 10.0 * t / kRawHz + phase) + 0.4 * rng.gaussian();
      }
    }

    tr.ecg = SignalMatrix(3, kPhysLen);
    tr.ecg.channel_names = {"ECG1", "ECG2", "ECG3"};
    for (int c = 0; c < 3; ++c) {
      const double phase = rng.uniform(0.0, kTwoPi);
      double* row = tr.ecg.row(c);
      for (int t = 0; t < kPhysLen; ++t) {
        row[t] = amp * std::sin(kTwoPi * 8.0 * t / kRawHz + phase) + 0.3 * rng.gaussian();
      }
    }

    const auto fill_gsr = [&](SignalMatrix& m, int len) {
      m = SignalMatrix(1, len);
      m.channel_names = {"GSR1"};
      const double phase = rng.uniform(0.0, kTwoPi);
      double* row = m.row(0);
      for (int t = 0; t < len; ++t) {
        row[t] = 5.0 + 0.5 * amp * std::sin(kTwoPi * 2.0 * t / kRawHz + phase) +
                 0.1 * rng.gaussian();
      }
    };
    fill_gsr(tr.gsr, kPhysLen);
    fill_gsr(tr.gsr_pre, kPreLen);

    tr.eye = SignalMatrix(8, kEyeLen);
    tr.eye.channel_names = {"pupil_left",  "pupil_right",  "gaze_x_left",
                            "gaze_x_right", "gaze_y_left",  "gaze_y_right",
                            "eye_distance_left", "eye_distance_right"};
    // Blink masks first: ~1% chance per step of a six-sample blink.
    std::array<std::vector<char>, 2> blink;
    for (std::vector<char>& mask : blink) {
      mask.assign(kEyeLen, 0);
      int run = 0;
      for (int t = 0; t < kEyeLen; ++t) {
        if (run == 0 && rng.uniform01() < 0.01) run = 6;
        if (run > 0) {
          mask[t] = 1;
          --run;
        }
      }
    }
    const std::array<double, 4> base = {4.0, 0.8, 0.6, 5.5};
    for (int f = 0; f < kEyeFields; ++f) {
      const double phase = rng.uniform(0.0, kTwoPi);
      for (int side = 0; side < 2; ++side) {
        double* row = tr.eye.row(2 * f + side);
        for (int t = 0; t < kEyeLen; ++t) {
          row[t] = blink[side][t]
                       ? kEyeSentinel
                       : base[f] + 0.2 * amp * std::sin(kTwoPi * 0.3 * t / kEyeHz + phase) +
                             0.05 * rng.gaussian();
        }
      }
    }

    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace hfn::signals
