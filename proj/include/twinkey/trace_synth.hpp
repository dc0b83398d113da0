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

// Synthesis of seeded, spectrally shaped homodyne quadrature traces.
//
// Each probe/conjugate pair is built from two independent unit-PSD white
// processes w+ and w- that are shaped in the frequency domain:
//
//   probe     = (sqrt(S+) w+ + sqrt(S-) w-) / sqrt(2) + t
//   conjugate = (sqrt(S+) w+ - sqrt(S-) w-) / sqrt(2) + t
//
// so that (probe -/+ conjugate)/sqrt(2) has PSD S-/S+ (v_minus/v_plus inside
// the squeeze band). t is low-frequency technical noise common to both arms.

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "twinkey/fft.hpp"
#include "twinkey/gaussian_model.hpp"
#include "twinkey/rng.hpp"

namespace twinkey {

enum class Role : std::uint8_t { probe = 0, conjugate = 1, shot_noise = 2 };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::probe: return "probe";
    case Role::conjugate: return "conjugate";
    case Role::shot_noise: return "shot-noise";
  }
  return "unknown";
}

inline Role role_from_code(std::uint32_t code) {
  if (code > 2) throw std::invalid_argument("unknown role code " + std::to_string(code));
  return static_cast<Role>(code);
}

/// Sampled homodyne output in shot-noise-normalized units. Samples outside
/// [valid_begin, valid_end) are filter transients and must not be used.
struct QuadratureTrace {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;
  int channel_id = 0;
  Role role = Role::probe;
  std::uint64_t seed = 0;
  std::size_t valid_begin = 0;
  std::size_t valid_end = 0;

  std::span<const double> valid() const {
    return std::span<const double>(samples).subspan(valid_begin, valid_end - valid_begin);
  }
  std::size_t valid_size() const { return valid_end - valid_begin; }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

struct SynthConfig {
  double duration_s = 0.091;
  double sample_rate_hz = 16.0e6;
  std::vector<ChannelModel> channels;
  std::uint64_t master_seed = 1;

  /// ceil(duration * rate), tolerant of the rounding in e.g. 0.091 * 16e6.
  std::size_t sample_count() const {
    return static_cast<std::size_t>(std::ceil(duration_s * sample_rate_hz - 1e-6));
  }

  void validate() const {
    if (!(duration_s > 0.0)) throw std::invalid_argument("SynthConfig: duration must be positive");
    if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("SynthConfig: sample rate must be positive");
    if (channels.empty()) throw std::invalid_argument("SynthConfig: at least one channel is required");
    if (sample_count() < 16) throw std::invalid_argument("SynthConfig: trace shorter than 16 samples");
    for (std::size_t i = 0; i < channels.size(); ++i) {
      channels[i].validate();
      if (sample_rate_hz < 2.0 * channels[i].squeeze_band_hi_hz) {
        throw std::invalid_argument("SynthConfig: sample rate " + std::to_string(sample_rate_hz) +
                                    " Hz aliases the squeeze band of channel " + std::to_string(i + 1));
      }
    }
  }
};

// Spectral envelopes, in shot-noise units per unit-PSD white process.

namespace detail {

inline double banded(double in_band, const ChannelModel& m, double f) {
  if (f < m.squeeze_band_lo_hz) return 1.0;
  if (f <= m.squeeze_band_hi_hz) return in_band;
  // Squeezing degrades above the band; relax smoothly toward vacuum.
  const double width = 0.25 * m.squeeze_band_hi_hz;
  return 1.0 + (in_band - 1.0) * std::exp(-(f - m.squeeze_band_hi_hz) / width);
}

}  // namespace detail

inline double difference_psd(const ChannelModel& m, double f) { return detail::banded(m.v_minus, m, f); }
inline double sum_psd(const ChannelModel& m, double f) { return detail::banded(m.v_plus, m, f); }

/// Common-mode classical noise added to both arms; second-order roll-off
/// above the corner.
inline double technical_psd(const ChannelModel& m, double f) {
  const double level = std::pow(10.0, m.technical_noise_db / 10.0);
  const double x = f / m.technical_corner_hz;
  return level / (1.0 + x * x * x * x);
}

namespace detail {

inline std::vector<std::complex<double>> white_spectrum(RealFft& fft, std::uint64_t seed) {
  std::vector<double> w(fft.size());
  GaussianSource gauss(seed);
  gauss.fill(w.begin(), w.end());
  return fft.forward(w);
}

}  // namespace detail

/// Returns (probe, conjugate) for one channel. Substreams are keyed by
/// channel_id, so channels are independent and individually reproducible.
inline std::pair<QuadratureTrace, QuadratureTrace> synth_pair(const ChannelModel& model,
                                                              const SynthConfig& cfg, int channel_id) {
  cfg.validate();
  model.validate();
  if (cfg.sample_rate_hz < 2.0 * model.squeeze_band_hi_hz) {
    throw std::invalid_argument("synth_pair: sample rate aliases the squeeze band");
  }
  if (channel_id < 1) throw std::invalid_argument("synth_pair: channel ids start at 1");

  const std::size_t n = cfg.sample_count();
  const auto ch = static_cast<std::uint64_t>(channel_id);
  RealFft fft(n);
  const auto w_plus = detail::white_spectrum(fft, substream_seed(cfg.master_seed, ch, 1));
  const auto w_minus = detail::white_spectrum(fft, substream_seed(cfg.master_seed, ch, 2));
  const auto w_tech = detail::white_spectrum(fft, substream_seed(cfg.master_seed, ch, 3));

  std::vector<std::complex<double>> probe_spec(fft.bins());
  std::vector<std::complex<double>> conj_spec(fft.bins());
  const double df = cfg.sample_rate_hz / static_cast<double>(n);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t k = 0; k < fft.bins(); ++k) {
    const double f = df * static_cast<double>(k);
    const auto plus = std::sqrt(sum_psd(model, f)) * w_plus[k];
    const auto minus = std::sqrt(difference_psd(model, f)) * w_minus[k];
    const auto tech = std::sqrt(technical_psd(model, f)) * w_tech[k];
    probe_spec[k] = (plus + minus) * inv_sqrt2 + tech;
    conj_spec[k] = (plus - minus) * inv_sqrt2 + tech;
  }

  const std::uint64_t seed = substream_seed(cfg.master_seed, ch, 0);
  QuadratureTrace probe{fft.inverse(probe_spec), cfg.sample_rate_hz, channel_id, Role::probe, seed, 0, n};
  QuadratureTrace conj{fft.inverse(conj_spec), cfg.sample_rate_hz, channel_id, Role::conjugate, seed, 0, n};
  return {std::move(probe), std::move(conj)};
}

/// Unit-PSD white reference trace (the shot-noise limit).
inline QuadratureTrace synth_shot_noise(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.sample_count();
  const std::uint64_t seed = substream_seed(cfg.master_seed, 0, 1);
  QuadratureTrace out{std::vector<double>(n), cfg.sample_rate_hz, 0, Role::shot_noise, seed, 0, n};
  GaussianSource gauss(seed);
  gauss.fill(out.samples.begin(), out.samples.end());
  return out;
}

inline double sample_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("sample_correlation: inputs must have equal length >= 2");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw std::invalid_argument("sample_correlation: zero variance");
  return sab / std::sqrt(saa * sbb);
}

/// Pearson correlation of every pair of traces (full sample range).
inline std::vector<std::vector<double>> cross_channel_independence_check(
    std::span<const QuadratureTrace> traces) {
  if (traces.size() < 2) throw std::invalid_argument("cross_channel_independence_check: need >= 2 traces");
  for (const auto& t : traces) {
    if (t.samples.size() != traces.front().samples.size()) {
      throw std::invalid_argument("cross_channel_independence_check: trace length mismatch");
    }
  }
  const std::size_t k = traces.size();
  std::vector<std::vector<double>> out(k, std::vector<double>(k, 1.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      out[i][j] = out[j][i] = sample_correlation(traces[i].samples, traces[j].samples);
    }
  }
  return out;
}

}  // namespace twinkey
