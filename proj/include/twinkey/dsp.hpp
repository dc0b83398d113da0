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

// Measurement post-processing: bandpass, slice integration with buffer
// gaps, sign binning, and spectrum-analyzer style squeezing estimates.

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twinkey/bitstream.hpp"
#include "twinkey/fir.hpp"
#include "twinkey/spectrum.hpp"
#include "twinkey/trace_synth.hpp"

namespace twinkey {

/// Passband [f_lo_hz, f_hi_hz]; each transition band lies outside the
/// passband, so the low stopband edge is f_lo - transition_lo and the high
/// stopband edge is f_hi + transition_hi.
struct FilterSpec {
  double f_lo_hz = 15.0e3;
  double f_hi_hz = 2.0e6;
  double transition_lo_hz = 10.0e3;
  double transition_hi_hz = 200.0e3;
  double stopband_attenuation_db = 60.0;

  void validate(double sample_rate_hz) const {
    if (!(f_lo_hz > 0.0 && f_lo_hz < f_hi_hz && f_hi_hz < sample_rate_hz / 2.0)) {
      throw std::invalid_argument("FilterSpec: need 0 < f_lo < f_hi < sample_rate / 2");
    }
    if (!(transition_lo_hz > 0.0 && transition_hi_hz > 0.0)) {
      throw std::invalid_argument("FilterSpec: transition widths must be positive");
    }
    if (f_lo_hz - transition_lo_hz < 0.0) {
      throw std::invalid_argument("FilterSpec: low transition extends below DC");
    }
    if (f_hi_hz + transition_hi_hz > sample_rate_hz / 2.0) {
      throw std::invalid_argument("FilterSpec: high transition extends past Nyquist");
    }
    if (!(stopband_attenuation_db >= 21.0)) {
      throw std::invalid_argument("FilterSpec: stopband attenuation below 21 dB");
    }
  }
};

/// Bandpass taps as the difference of two Kaiser lowpasses, each designed
/// 6 dB beyond the target so their combined stopband ripple still meets it.
inline std::vector<double> design_bandpass(const FilterSpec& spec, double sample_rate_hz) {
  spec.validate(sample_rate_hz);
  const double atten = spec.stopband_attenuation_db + 6.03;
  const auto upper = design_lowpass(spec.f_hi_hz + spec.transition_hi_hz / 2.0, spec.transition_hi_hz, atten,
                                    sample_rate_hz);
  const auto lower = design_lowpass(spec.f_lo_hz - spec.transition_lo_hz / 2.0, spec.transition_lo_hz, atten,
                                    sample_rate_hz);
  const std::size_t n = std::max(upper.size(), lower.size());
  std::vector<double> h(n, 0.0);
  const std::size_t off_u = (n - upper.size()) / 2;
  const std::size_t off_l = (n - lower.size()) / 2;
  for (std::size_t i = 0; i < upper.size(); ++i) h[off_u + i] += upper[i];
  for (std::size_t i = 0; i < lower.size(); ++i) h[off_l + i] -= lower[i];
  return h;
}

/// A designed bandpass bound to one sample rate; reusable across traces.
class BandpassFilter {
 public:
  BandpassFilter(const FilterSpec& spec, double sample_rate_hz)
      : spec_(spec), sample_rate_hz_(sample_rate_hz), conv_(design_bandpass(spec, sample_rate_hz)) {}

  const FilterSpec& spec() const { return spec_; }
  const std::vector<double>& taps() const { return conv_.taps(); }
  std::size_t length() const { return conv_.taps().size(); }

  /// Output is aligned with the input timeline. One full filter length at
  /// each end of the input's valid region is marked invalid.
  QuadratureTrace apply(const QuadratureTrace& in) {
    if (in.sample_rate_hz != sample_rate_hz_) {
      throw std::invalid_argument("bandpass: trace sample rate differs from the filter design rate");
    }
    const std::size_t len = length();
    if (in.valid_size() < 3 * len) {
      throw std::invalid_argument("bandpass: trace shorter than 3 filter lengths (" + std::to_string(3 * len) +
                                  " samples)");
    }
    QuadratureTrace out = in;
    out.samples = conv_.apply(in.samples);
    out.valid_begin = in.valid_begin + len;
    out.valid_end = in.valid_end - len;
    return out;
  }

 private:
  FilterSpec spec_;
  double sample_rate_hz_;
  FftConvolver conv_;
};

inline QuadratureTrace bandpass(const QuadratureTrace& trace, const FilterSpec& spec) {
  BandpassFilter filter(spec, trace.sample_rate_hz);
  return filter.apply(trace);
}

inline std::size_t samples_for_ns(double ns, double sample_rate_hz) {
  return static_cast<std::size_t>(std::llround(ns * 1e-9 * sample_rate_hz));
}

/// Number of complete slices in `valid` samples of alternating
/// [slice, buffer] windows that start with a slice.
inline std::size_t slice_count(std::size_t valid, std::size_t slice, std::size_t buffer) {
  if (slice == 0 || valid < slice) return 0;
  return (valid - slice) / (slice + buffer) + 1;
}

/// Sum of samples in each slice window of the valid region; buffer windows
/// between slices are discarded. Durations round to whole samples.
inline std::vector<double> slice_integrate(const QuadratureTrace& trace, double slice_ns, double buffer_ns) {
  if (!(slice_ns > 0.0) || !(buffer_ns >= 0.0)) {
    throw std::invalid_argument("slice_integrate: need slice_ns > 0 and buffer_ns >= 0");
  }
  const std::size_t slice = samples_for_ns(slice_ns, trace.sample_rate_hz);
  const std::size_t buffer = samples_for_ns(buffer_ns, trace.sample_rate_hz);
  if (slice == 0) throw std::invalid_argument("slice_integrate: slice shorter than one sample");
  const auto valid = trace.valid();
  const std::size_t count = slice_count(valid.size(), slice, buffer);
  if (count == 0) throw std::invalid_argument("slice_integrate: valid region shorter than one slice");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t start = k * (slice + buffer);
    double sum = 0.0;
    for (std::size_t i = 0; i < slice; ++i) sum += valid[start + i];
    out[k] = sum;
  }
  return out;
}

/// 1 for strictly positive values, 0 for zero or negative.
inline BitStream binarize(std::span<const double> values) {
  BitStream s;
  s.bits.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) s.bits[i] = values[i] > 0.0 ? 1 : 0;
  return s;
}

inline BitStream binarize(std::span<const double> values, double slice_ns, double buffer_ns, int channel,
                          StreamRole role) {
  BitStream s = binarize(values);
  s.slice_ns = slice_ns;
  s.buffer_ns = buffer_ns;
  s.source_channel = channel;
  s.role = role;
  return s;
}

struct SqueezingEstimate {
  double db = 0.0;
  bool floored = false;  // difference power vanished; db holds kSqueezingFloorDb
  double difference_power = 0.0;
  double shot_power = 0.0;
};

inline constexpr double kSqueezingFloorDb = -300.0;

/// Band-averaged PSD of (probe - conjugate)/sqrt(2) around `analysis_hz`,
/// relative to the same band of the shot-noise trace, in dB. Uses the
/// intersection of the probe and conjugate valid regions.
inline SqueezingEstimate estimate_squeezing(const QuadratureTrace& probe, const QuadratureTrace& conjugate,
                                            const QuadratureTrace& shot, double analysis_hz,
                                            double bandwidth_hz, std::size_t segment = 4096) {
  if (probe.samples.size() != conjugate.samples.size() || probe.samples.size() != shot.samples.size()) {
    throw std::invalid_argument("estimate_squeezing: traces differ in length");
  }
  if (probe.sample_rate_hz != conjugate.sample_rate_hz || probe.sample_rate_hz != shot.sample_rate_hz) {
    throw std::invalid_argument("estimate_squeezing: traces differ in sample rate");
  }
  if (!(analysis_hz > 0.0) || !(bandwidth_hz > 0.0) || analysis_hz + bandwidth_hz / 2.0 > probe.sample_rate_hz / 2.0) {
    throw std::invalid_argument("estimate_squeezing: analysis band outside the trace bandwidth");
  }
  const std::size_t begin = std::max(probe.valid_begin, conjugate.valid_begin);
  const std::size_t end = std::min(probe.valid_end, conjugate.valid_end);
  if (end <= begin) throw std::invalid_argument("estimate_squeezing: no common valid region");
  std::vector<double> diff(end - begin);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = begin; i < end; ++i) {
    diff[i - begin] = (probe.samples[i] - conjugate.samples[i]) * inv_sqrt2;
  }
  const auto diff_psd = welch_psd(diff, probe.sample_rate_hz, segment);
  const auto shot_psd = welch_psd(shot.valid(), shot.sample_rate_hz, segment);
  SqueezingEstimate out;
  out.difference_power = band_average(diff_psd, analysis_hz, bandwidth_hz).mean;
  out.shot_power = band_average(shot_psd, analysis_hz, bandwidth_hz).mean;
  if (!(out.shot_power > 0.0)) throw std::invalid_argument("estimate_squeezing: zero shot-noise power in band");
  const double ratio = out.difference_power / out.shot_power;
  if (ratio <= std::pow(10.0, kSqueezingFloorDb / 10.0)) {
    out.db = kSqueezingFloorDb;
    out.floored = true;
  } else {
    out.db = 10.0 * std::log10(ratio);
  }
  return out;
}

/// Lag-1 Pearson correlation of the bit sequence.
inline double adjacent_bit_correlation(const BitStream& stream) {
  const auto& b = stream.bits;
  if (b.size() < 1000) throw std::invalid_argument("adjacent_bit_correlation: need at least 1000 bits");
  const std::size_t n = b.size() - 1;
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = b[i];
    const double y = b[i + 1];
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  const double nn = static_cast<double>(n);
  const double cov = sxy - sx * sy / nn;
  const double vx = sxx - sx * sx / nn;
  const double vy = syy - sy * sy / nn;
  if (!(vx > 0.0) || !(vy > 0.0)) throw std::invalid_argument("adjacent_bit_correlation: constant stream");
  return cov / std::sqrt(vx * vy);
}

}  // namespace twinkey
