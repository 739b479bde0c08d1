// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0
//
// IIR filter design and zero-phase application. Butterworth designs
// follow the classic analog-prototype route: unit-cutoff poles, band
// transform with a prewarped edge, bilinear map, then factorization
// into second-order sections. Filters are applied forward-backward
// (filtfilt) with odd-reflection padding and steady-state initial
// conditions, which squares the magnitude response and cancels the
// phase.

#pragma once

#include <array>
#include <complex>
#include <vector>

namespace hfn::filters {

// One second-order section, denominator normalized to a0 = 1:
//   y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

using Sos = std::vector<Biquad>;

// Butterworth low-pass of the given order with cutoff cut_hz at
// sampling rate fs. Requires 0 < cut_hz < fs/2.
Sos butter_lowpass(int order, double cut_hz, double fs);

// Butterworth band-pass between low_hz and high_hz (2*order poles).
// Requires 0 < low_hz < high_hz < fs/2.
Sos butter_bandpass(int order, double low_hz, double high_hz, double fs);

// Second-order notch at freq_hz with quality factor q (bandwidth
// freq_hz/q). Requires 0 < freq_hz < fs/2.
Sos iir_notch(double freq_hz, double q, double fs);

// Single-pass cascade, zero initial state.
std::vector<double> sosfilt(const Sos& sos, const std::vector<double>& x);

// Single-pass cascade with explicit per-section state (direct form II
// transposed, two state values per section). State is updated in place.
std::vector<double> sosfilt(const Sos& sos, const std::vector<double>& x,
                            std::vector<std::array<double, 2>>& state);

// Per-section steady-state response to a unit step, for priming
// filtfilt. Section i's state assumes its input settled at the product
// of the upstream sections' DC gains.
std::vector<std::array<double, 2>> sos_step_state(const Sos& sos);

// Zero-phase forward-backward filtering with odd-reflection padding on
// each side of 3*(2*sections + 1) samples, less 3 per first-order
// section. The input must be longer than the padding.
std::vector<double> filtfilt(const Sos& sos, const std::vector<double>& x);

// |H(e^{j 2 pi hz / fs})| of the cascade; used by design checks.
double sos_gain_at(const Sos& sos, double hz, double fs);

}  // namespace hfn::filters
