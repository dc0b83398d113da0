// Copyright 2026 The twinkey Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Linear-phase windowed-sinc FIR design (Kaiser window) and FFT convolution.

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twinkey/fft.hpp"

namespace twinkey {

/// Kaiser's empirical beta for a given stopband attenuation in dB.
inline double kaiser_beta(double attenuation_db) {
  if (attenuation_db > 50.0) return 0.1102 * (attenuation_db - 8.7);
  if (attenuation_db >= 21.0) {
    return 0.5842 * std::pow(attenuation_db - 21.0, 0.4) + 0.07886 * (attenuation_db - 21.0);
  }
  return 0.0;
}

/// Odd tap count meeting `attenuation_db` across a transition of `transition_hz`.
inline std::size_t kaiser_length(double attenuation_db, double transition_hz, double sample_rate_hz) {
  const double dw = 2.0 * std::numbers::pi * transition_hz / sample_rate_hz;
  auto n = static_cast<std::size_t>(std::ceil((attenuation_db - 7.95) / (2.285 * dw))) + 1;
  if (n % 2 == 0) ++n;
  return std::max<std::size_t>(n, 3);
}

inline std::vector<double> kaiser_window(std::size_t n, double beta) {
  std::vector<double> w(n);
  const double m = static_cast<double>(n - 1);
  const double norm = std::cyl_bessel_i(0.0, beta);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = 2.0 * static_cast<double>(i) / m - 1.0;
    w[i] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
  }
  return w;
}

/// Lowpass with -6 dB point at cutoff_hz, unity DC gain.
inline std::vector<double> design_lowpass(double cutoff_hz, double transition_hz, double attenuation_db,
                                          double sample_rate_hz) {
  const std::size_t n = kaiser_length(attenuation_db, transition_hz, sample_rate_hz);
  const auto w = kaiser_window(n, kaiser_beta(attenuation_db));
  const double fc = cutoff_hz / sample_rate_hz;
  const double mid = static_cast<double>(n - 1) / 2.0;
  std::vector<double> h(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) - mid;
    const double sinc = t == 0.0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
    h[i] = sinc * w[i];
    sum += h[i];
  }
  for (double& v : h) v /= sum;
  return h;
}

/// |H(f)| of a tap vector, evaluated directly.
inline double magnitude_response(std::span<const double> taps, double f_hz, double sample_rate_hz) {
  std::complex<double> acc = 0.0;
  const double w = 2.0 * std::numbers::pi * f_hz / sample_rate_hz;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    acc += taps[i] * std::polar(1.0, -w * static_cast<double>(i));
  }
  return std::abs(acc);
}

/// Linear convolution with the group delay of an odd-length symmetric kernel
/// removed: out[i] = sum_k taps[k] * x[i + (L-1)/2 - k], zero outside x.
class FftConvolver {
 public:
  explicit FftConvolver(std::vector<double> taps) : taps_(std::move(taps)) {
    if (taps_.empty() || taps_.size() % 2 == 0) {
      throw std::invalid_argument("FftConvolver: kernel length must be odd");
    }
  }

  const std::vector<double>& taps() const { return taps_; }

  std::vector<double> apply(std::span<const double> x) {
    const std::size_t len = taps_.size();
    const std::size_t n = next_fast_size(x.size() + len - 1);
    if (!fft_ || fft_->size() != n) {
      fft_ = std::make_unique<RealFft>(n);
      kernel_ = fft_->forward(taps_);
    }
    auto spec = fft_->forward(x);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= kernel_[k];
    const auto full = fft_->inverse(spec);
    const std::size_t delay = (len - 1) / 2;
    return std::vector<double>(full.begin() + static_cast<std::ptrdiff_t>(delay),
                               full.begin() + static_cast<std::ptrdiff_t>(delay + x.size()));
  }

 private:
  std::vector<double> taps_;
  std::unique_ptr<RealFft> fft_;
  std::vector<std::complex<double>> kernel_;
};

}  // namespace twinkey
