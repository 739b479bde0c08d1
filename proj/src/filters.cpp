// Copyright 2026 The HyperFuseNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "hfn/filters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace hfn::filters {

namespace {

using Complex = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

// Poles, zeros, and gain of an analog or digital filter.
struct Zpk {
  std::vector<Complex> zeros;
  std::vector<Complex> poles;
  double gain = 1.0;
};

// Unit-cutoff analog Butterworth prototype: poles spread over the left
// half of the unit circle, no zeros, unit gain.
Zpk butter_prototype(int order) {
  Zpk zpk;
  for (int k = 0; k < order; ++k) {
    const double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
    zpk.poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return zpk;
}

// s -> s / warped: moves the unit cutoff to `warped` rad/s.
void lp_to_lp(Zpk& zpk, double warped) {
  const int degree = static_cast<int>(zpk.poles.size() - zpk.zeros.size());
  for (auto& z : zpk.zeros) z *= warped;
  for (auto& p : zpk.poles) p *= warped;
  zpk.gain *= std::pow(warped, degree);
}

// s -> (s^2 + wo^2) / (bw s): low-pass prototype to band-pass with
// center wo and width bw. Each pole splits into two; `order` zeros
// appear at s = 0.
void lp_to_bp(Zpk& zpk, double wo, double bw) {
  const int degree = static_cast<int>(zpk.poles.size() - zpk.zeros.size());
  std::vector<Complex> poles;
  for (const auto& p : zpk.poles) {
    const Complex scaled = p * (bw / 2.0);
    const Complex disc = std::sqrt(scaled * scaled - wo * wo);
    poles.push_back(scaled + disc);
    poles.push_back(scaled - disc);
  }
  zpk.poles = std::move(poles);
  std::vector<Complex> zeros;
  for (const auto& z : zpk.zeros) {
    const Complex scaled = z * (bw / 2.0);
    const Complex disc = std::sqrt(scaled * scaled - wo * wo);
    zeros.push_back(scaled + disc);
    zeros.push_back(scaled - disc);
  }
  zeros.resize(zeros.size() + degree, Complex(0.0, 0.0));
  zpk.zeros = std::move(zeros);
  zpk.gain *= std::pow(bw, degree);
}

// Bilinear transform z = (fs2 + s) / (fs2 - s) with fs2 = 4 (the
// tan-based prewarp in design() matches this constant). Zeros missing
// relative to poles land at z = -1.
void bilinear(Zpk& zpk) {
  const double fs2 = 4.0;
  Complex num(1.0, 0.0), den(1.0, 0.0);
  for (const auto& z : zpk.zeros) num *= (fs2 - z);
  for (const auto& p : zpk.poles) den *= (fs2 - p);
  const int degree = static_cast<int>(zpk.poles.size() - zpk.zeros.size());

  for (auto& z : zpk.zeros) z = (fs2 + z) / (fs2 - z);
  for (auto& p : zpk.poles) p = (fs2 + p) / (fs2 - p);
  zpk.zeros.resize(zpk.zeros.size() + degree, Complex(-1.0, 0.0));
  zpk.gain *= (num / den).real();
}

// Splits roots into conjugate pairs (one representative each, positive
// imaginary part) and reals. Conjugacy holds by construction for real
// filters, so a tolerance on the imaginary part suffices.
void split_roots(const std::vector<Complex>& roots, std::vector<Complex>& pairs,
                 std::vector<double>& reals) {
  for (const auto& r : roots) {
    if (std::abs(r.imag()) > 1e-9) {
      if (r.imag() > 0.0) pairs.push_back(r);
    } else {
      reals.push_back(r.real());
    }
  }
}

// Factor a digital Zpk into second-order sections. The overall gain is
// folded into the first section. Zeros here are always real (+1/-1 from
// the bilinear transform of Butterworth designs); each two-pole section
// takes a +1/-1 pair when both remain, else two of whatever is left.
Sos zpk_to_sos(const Zpk& zpk) {
  std::vector<Complex> pole_pairs, zero_pairs;
  std::vector<double> pole_reals, zero_reals;
  split_roots(zpk.poles, pole_pairs, pole_reals);
  split_roots(zpk.zeros, zero_pairs, zero_reals);
  if (!zero_pairs.empty()) {
    throw std::invalid_argument("sos: unexpected complex zeros in a Butterworth design");
  }

  // Prefer mixed-sign zero pairs: (z-1)(z+1) keeps coefficients tame.
  std::vector<double> plus, minus;
  for (double z : zero_reals) (z > 0.0 ? plus : minus).push_back(z);

  auto take_zero_pair = [&](double& q0, double& q1) {
    if (!plus.empty() && !minus.empty()) {
      q0 = plus.back();
      plus.pop_back();
      q1 = minus.back();
      minus.pop_back();
    } else {
      auto& pool = plus.empty() ? minus : plus;
      q0 = pool.back();
      pool.pop_back();
      q1 = pool.back();
      pool.pop_back();
    }
  };

  Sos sos;
  for (const auto& p : pole_pairs) {
    Biquad s;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    double z0, z1;
    take_zero_pair(z0, z1);
    s.b0 = 1.0;
    s.b1 = -(z0 + z1);
    s.b2 = z0 * z1;
    sos.push_back(s);
  }
  // Real poles pair among themselves (even count) or form one
  // first-order section (odd-order low-pass).
  std::sort(pole_reals.begin(), pole_reals.end());
  while (pole_reals.size() >= 2) {
    const double p0 = pole_reals.back();
    pole_reals.pop_back();
    const double p1 = pole_reals.back();
    pole_reals.pop_back();
    Biquad s;
    s.a1 = -(p0 + p1);
    s.a2 = p0 * p1;
    double z0, z1;
    take_zero_pair(z0, z1);
    s.b0 = 1.0;
    s.b1 = -(z0 + z1);
    s.b2 = z0 * z1;
    sos.push_back(s);
  }
  if (!pole_reals.empty()) {
    Biquad s;
    s.a1 = -pole_reals.back();
    const double z = plus.empty() ? (minus.empty() ? 0.0 : minus.back()) : plus.back();
    if (!plus.empty()) {
      plus.pop_back();
    } else if (!minus.empty()) {
      minus.pop_back();
    }
    s.b0 = 1.0;
    s.b1 = -z;
    sos.push_back(s);
  }

  if (sos.empty()) sos.push_back(Biquad{});
  sos.front().b0 *= zpk.gain;
  sos.front().b1 *= zpk.gain;
  sos.front().b2 *= zpk.gain;
  return sos;
}

double prewarp(double hz, double fs) {
  // Normalized edge in half-cycles/sample, warped for the fs2=4
  // bilinear constant.
  return 4.0 * std::tan(kPi * (hz / (fs / 2.0)) / 2.0);
}

}  // namespace

Sos butter_lowpass(int order, double cut_hz, double fs) {
  if (order < 1) throw std::invalid_argument("butterworth: order must be >= 1");
  if (!(cut_hz > 0.0) || !(cut_hz < fs / 2.0)) {
    throw std::invalid_argument("butterworth: cutoff " + std::to_string(cut_hz) +
                                " Hz outside (0, " + std::to_string(fs / 2.0) + ") at fs " +
                                std::to_string(fs));
  }
  Zpk zpk = butter_prototype(order);
  lp_to_lp(zpk, prewarp(cut_hz, fs));
  bilinear(zpk);
  return zpk_to_sos(zpk);
}

Sos butter_bandpass(int order, double low_hz, double high_hz, double fs) {
  if (order < 1) throw std::invalid_argument("butterworth: order must be >= 1");
  if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < fs / 2.0)) {
    throw std::invalid_argument("butterworth: band [" + std::to_string(low_hz) + ", " +
                                std::to_string(high_hz) + "] Hz invalid at fs " +
                                std::to_string(fs));
  }
  const double w1 = prewarp(low_hz, fs);
  const double w2 = prewarp(high_hz, fs);
  Zpk zpk = butter_prototype(order);
  lp_to_bp(zpk, std::sqrt(w1 * w2), w2 - w1);
  bilinear(zpk);
  return zpk_to_sos(zpk);
}

Sos iir_notch(double freq_hz, double q, double fs) {
  if (!(freq_hz > 0.0) || !(freq_hz < fs / 2.0)) {
    throw std::invalid_argument("notch: frequency " + std::to_string(freq_hz) +
                                " Hz outside (0, " + std::to_string(fs / 2.0) + ") at fs " +
                                std::to_string(fs));
  }
  if (!(q > 0.0)) throw std::invalid_argument("notch: quality factor must be positive");
  // Digital design: half-power points land exactly at w0*(1 +- 1/(2q)),
  // so beta comes from the prewarped half-bandwidth w0/(2q) rather than
  // the analog sin(w0)/(2q) rule.
  const double w0 = 2.0 * kPi * freq_hz / fs;
  const double beta = std::tan(w0 / (2.0 * q));
  const double gain = 1.0 / (1.0 + beta);
  Biquad s;
  s.b0 = gain;
  s.b1 = -2.0 * std::cos(w0) * gain;
  s.b2 = gain;
  s.a1 = -2.0 * std::cos(w0) * gain;
  s.a2 = 2.0 * gain - 1.0;
  return {s};
}

std::vector<double> sosfilt(const Sos& sos, const std::vector<double>& x,
                            std::vector<std::array<double, 2>>& state) {
  if (state.size() != sos.size()) {
    throw std::invalid_argument("sosfilt: state has " + std::to_string(state.size()) +
                                " sections, filter has " + std::to_string(sos.size()));
  }
  std::vector<double> y = x;
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const Biquad& f = sos[s];
    double s1 = state[s][0];
    double s2 = state[s][1];
    for (auto& v : y) {
      const double in = v;
      const double out = f.b0 * in + s1;
      s1 = f.b1 * in - f.a1 * out + s2;
      s2 = f.b2 * in - f.a2 * out;
      v = out;
    }
    state[s][0] = s1;
    state[s][1] = s2;
  }
  return y;
}

std::vector<double> sosfilt(const Sos& sos, const std::vector<double>& x) {
  std::vector<std::array<double, 2>> state(sos.size(), {0.0, 0.0});
  return sosfilt(sos, x, state);
}

std::vector<std::array<double, 2>> sos_step_state(const Sos& sos) {
  std::vector<std::array<double, 2>> state;
  double level = 1.0;  // DC level entering the current section
  for (const Biquad& f : sos) {
    const double dc = (f.b0 + f.b1 + f.b2) / (1.0 + f.a1 + f.a2);
    const double out = level * dc;
    // Steady state of the two direct-form-II-transposed registers.
    state.push_back({out - f.b0 * level, f.b2 * level - f.a2 * out});
    level = out;
  }
  return state;
}

std::vector<double> filtfilt(const Sos& sos, const std::vector<double>& x) {
  // Padding covers three times the filter's impulse-response scale:
  // 2 taps per section plus 1, minus one per degenerate (first-order)
  // section so odd-order cascades are not over-padded.
  std::size_t b2_zero = 0, a2_zero = 0;
  for (const Biquad& f : sos) {
    if (f.b2 == 0.0) ++b2_zero;
    if (f.a2 == 0.0) ++a2_zero;
  }
  const std::size_t padlen = 3 * (2 * sos.size() + 1 - std::min(b2_zero, a2_zero));
  if (x.size() <= padlen) {
    throw std::invalid_argument("filtfilt: input length " + std::to_string(x.size()) +
                                " must exceed the padding " + std::to_string(padlen));
  }
  const std::size_t n = x.size();

  // Odd reflection about the end points.
  std::vector<double> ext;
  ext.reserve(n + 2 * padlen);
  for (std::size_t i = 0; i < padlen; ++i) ext.push_back(2.0 * x[0] - x[padlen - i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 0; i < padlen; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

  const auto zi = sos_step_state(sos);

  auto primed_pass = [&](std::vector<double>& signal) {
    auto state = zi;
    for (auto& s : state) {
      s[0] *= signal.front();
      s[1] *= signal.front();
    }
    signal = sosfilt(sos, signal, state);
  };

  primed_pass(ext);
  std::reverse(ext.begin(), ext.end());
  primed_pass(ext);
  std::reverse(ext.begin(), ext.end());

  return std::vector<double>(ext.begin() + padlen, ext.begin() + padlen + n);
}

double sos_gain_at(const Sos& sos, double hz, double fs) {
  const double w = 2.0 * kPi * hz / fs;
  const Complex e1 = std::polar(1.0, -w);
  const Complex e2 = std::polar(1.0, -2.0 * w);
  Complex h(1.0, 0.0);
  for (const Biquad& f : sos) {
    h *= (f.b0 + f.b1 * e1 + f.b2 * e2) / (1.0 + f.a1 * e1 + f.a2 * e2);
  }
  return std::abs(h);
}

}  // namespace hfn::filters
