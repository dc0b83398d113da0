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

// Welch power spectral density estimates.

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "twinkey/fft.hpp"

namespace twinkey {

struct WelchPsd {
  std::vector<double> power;  // one-sided, bins 0..segment/2
  double bin_hz = 0.0;
  std::size_t segments = 0;

  double frequency(std::size_t k) const { return bin_hz * static_cast<double>(k); }
};

/// Hann-windowed Welch estimate with 50% overlap. Normalized so that white
/// noise of variance s^2 reads s^2 in every bin: a unit-variance white trace
/// is the shot-noise reference level.
inline WelchPsd welch_psd(std::span<const double> x, double sample_rate_hz, std::size_t segment = 4096) {
  if (segment < 8 || x.size() < segment) {
    throw std::invalid_argument("welch_psd: input shorter than one segment");
  }
  std::vector<double> window(segment);
  double window_power = 0.0;
  for (std::size_t i = 0; i < segment; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(segment));
    window_power += window[i] * window[i];
  }
  RealFft fft(segment);
  WelchPsd out;
  out.power.assign(fft.bins(), 0.0);
  out.bin_hz = sample_rate_hz / static_cast<double>(segment);
  std::vector<double> buf(segment);
  for (std::size_t start = 0; start + segment <= x.size(); start += segment / 2) {
    for (std::size_t i = 0; i < segment; ++i) buf[i] = x[start + i] * window[i];
    const auto spec = fft.forward(buf);
    for (std::size_t k = 0; k < spec.size(); ++k) out.power[k] += std::norm(spec[k]);
    ++out.segments;
  }
  const double scale = 1.0 / (window_power * static_cast<double>(out.segments));
  for (double& p : out.power) p *= scale;
  return out;
}

struct BandPower {
  double mean = 0.0;
  std::size_t bins = 0;
};

/// Mean PSD over bins whose centre lies within [centre - width/2, centre + width/2].
inline BandPower band_average(const WelchPsd& psd, double centre_hz, double width_hz) {
  BandPower out;
  double sum = 0.0;
  for (std::size_t k = 1; k < psd.power.size(); ++k) {
    if (std::abs(psd.frequency(k) - centre_hz) <= width_hz / 2.0) {
      sum += psd.power[k];
      ++out.bins;
    }
  }
  if (out.bins == 0) throw std::invalid_argument("band_average: no bins inside the analysis band");
  out.mean = sum / static_cast<double>(out.bins);
  return out;
}

}  // namespace twinkey
