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

#include "twinkey/dsp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"

namespace twinkey {
namespace {

constexpr double kFs = 16e6;

QuadratureTrace make_trace(std::vector<double> samples) {
  QuadratureTrace t;
  t.sample_rate_hz = kFs;
  t.valid_end = samples.size();
  t.samples = std::move(samples);
  t.channel_id = 1;
  return t;
}

QuadratureTrace sine(double f_hz, std::size_t n, double amplitude = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * f_hz * static_cast<double>(i) / kFs);
  }
  return make_trace(std::move(x));
}

QuadratureTrace white(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (double& v : x) v = g(eng);
  return make_trace(std::move(x));
}

double to_db(double gain) { return 20.0 * std::log10(gain); }

class Bandpass : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { filter_ = new BandpassFilter(FilterSpec{}, kFs); }
  static void TearDownTestSuite() {
    delete filter_;
    filter_ = nullptr;
  }
  static BandpassFilter* filter_;
};
BandpassFilter* Bandpass::filter_ = nullptr;

TEST_F(Bandpass, KernelShape) {
  const auto& h = filter_->taps();
  EXPECT_EQ(h.size() % 2, 1u);
  EXPECT_GT(h.size(), 5000u);
  for (std::size_t i = 0; i < h.size() / 2; ++i) ASSERT_NEAR(h[i], h[h.size() - 1 - i], 1e-15) << i;
}

TEST_F(Bandpass, PassesInBandSine) {
  const auto in = sine(1e6, 60000);
  const auto out = filter_->apply(in);
  EXPECT_EQ(out.valid_begin, filter_->length());
  EXPECT_EQ(out.valid_end, in.samples.size() - filter_->length());
  const auto ref = std::span<const double>(in.samples).subspan(out.valid_begin, out.valid_size());
  EXPECT_NEAR(oracle::rms(out.valid()) / oracle::rms(ref), 1.0, 0.01);
}

TEST_F(Bandpass, RejectsLowFrequencySine) {
  const auto in = sine(1e3, 80000);
  const auto out = filter_->apply(in);
  EXPECT_LE(to_db(oracle::rms(out.valid()) / oracle::rms(in.samples)), -40.0);
}

TEST_F(Bandpass, RemovesDc) {
  auto in = white(40000, 3);
  for (double& v : in.samples) v += 5.0;
  const auto out = filter_->apply(in);
  EXPECT_NEAR(oracle::mean(out.valid()), 0.0, 0.05);
}

TEST_F(Bandpass, IsLinear) {
  const auto x = white(30000, 4);
  const auto y = white(30000, 5);
  std::vector<double> mix(x.samples.size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.5 * x.samples[i] - 0.75 * y.samples[i];
  const auto fx = filter_->apply(x);
  const auto fy = filter_->apply(y);
  const auto fm = filter_->apply(make_trace(mix));
  for (std::size_t i = 0; i < mix.size(); ++i) {
    ASSERT_NEAR(fm.samples[i], 2.5 * fx.samples[i] - 0.75 * fy.samples[i], 1e-9) << i;
  }
}

TEST_F(Bandpass, FftMatchesDirectConvolution) {
  const auto x = white(20000, 6);
  const auto fast = filter_->apply(x);
  const auto slow = oracle::direct_convolution(x.samples, filter_->taps());
  for (std::size_t i = 0; i < slow.size(); ++i) ASSERT_NEAR(fast.samples[i], slow[i], 1e-10) << i;
}

TEST_F(Bandpass, StopbandAttenuation) {
  const FilterSpec spec;
  const auto& h = filter_->taps();
  const double low_edge = spec.f_lo_hz - spec.transition_lo_hz;
  const double high_edge = spec.f_hi_hz + spec.transition_hi_hz;
  for (double f = 0.0; f <= low_edge; f += low_edge / 50.0) {
    EXPECT_LE(to_db(magnitude_response(h, f, kFs)), -60.0) << f;
  }
  for (double f = high_edge; f <= kFs / 2.0; f += 20e3) {
    EXPECT_LE(to_db(magnitude_response(h, f, kFs)), -60.0) << f;
  }
}

TEST_F(Bandpass, PassbandFlatness) {
  const FilterSpec spec;
  const auto& h = filter_->taps();
  for (double f = spec.f_lo_hz; f <= spec.f_hi_hz; f += (spec.f_hi_hz - spec.f_lo_hz) / 400.0) {
    EXPECT_NEAR(to_db(magnitude_response(h, f, kFs)), 0.0, 0.1) << f;
  }
}

TEST_F(Bandpass, RejectsShortTraceAndWrongRate) {
  EXPECT_THROW(filter_->apply(white(3 * filter_->length() - 1, 1)), std::invalid_argument);
  auto t = white(40000, 1);
  t.sample_rate_hz = 8e6;
  EXPECT_THROW(filter_->apply(t), std::invalid_argument);
}

TEST(FilterSpec, Validation) {
  FilterSpec s;
  EXPECT_NO_THROW(s.validate(kFs));
  s.f_lo_hz = 3e6;
  EXPECT_THROW(s.validate(kFs), std::invalid_argument);
  s = FilterSpec{};
  s.transition_lo_hz = 20e3;
  EXPECT_THROW(s.validate(kFs), std::invalid_argument);
  s = FilterSpec{};
  s.f_hi_hz = 7.9e6;
  EXPECT_THROW(s.validate(kFs), std::invalid_argument);
  s = FilterSpec{};
  s.stopband_attenuation_db = 10.0;
  EXPECT_THROW(s.validate(kFs), std::invalid_argument);
}

TEST(Kaiser, DesignFormulas) {
  EXPECT_NEAR(kaiser_beta(60.0), 0.1102 * 51.3, 1e-12);
  EXPECT_NEAR(kaiser_beta(30.0), 0.5842 * std::pow(9.0, 0.4) + 0.07886 * 9.0, 1e-12);
  EXPECT_EQ(kaiser_beta(10.0), 0.0);
  EXPECT_EQ(kaiser_length(60.0, 200e3, kFs) % 2, 1u);
  const auto w = kaiser_window(11, 5.0);
  EXPECT_DOUBLE_EQ(w[5], 1.0);
  EXPECT_NEAR(w[0], 1.0 / std::cyl_bessel_i(0.0, 5.0), 1e-15);
}

TEST(Slicing, HandCounts) {
  EXPECT_EQ(samples_for_ns(500.0, kFs), 8u);
  EXPECT_EQ(slice_count(100, 8, 8), 6u);
  EXPECT_EQ(slice_count(104, 8, 8), 7u);
  EXPECT_EQ(slice_count(7, 8, 8), 0u);
  EXPECT_EQ(slice_count(8, 8, 8), 1u);
  EXPECT_EQ(slice_count(16000, 8, 8), 1000u);
}

TEST(Slicing, ConstantTraceIntegratesToSliceWidth) {
  const auto t = make_trace(std::vector<double>(1000, 0.25));
  const auto s = slice_integrate(t, 500.0, 500.0);
  ASSERT_EQ(s.size(), 63u);  // last slice covers samples 992..999
  for (double v : s) EXPECT_DOUBLE_EQ(v, 8 * 0.25);
}

TEST(Slicing, SkipsBufferAndInvalidSamples) {
  std::vector<double> x(64);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  auto t = make_trace(x);
  t.valid_begin = 4;
  t.valid_end = 60;
  const auto s = slice_integrate(t, 250.0, 125.0);  // 4 samples, 2 buffer
  ASSERT_EQ(s.size(), 9u);
  EXPECT_DOUBLE_EQ(s[0], 4 + 5 + 6 + 7);
  EXPECT_DOUBLE_EQ(s[1], 10 + 11 + 12 + 13);
  EXPECT_DOUBLE_EQ(s[8], 52 + 53 + 54 + 55);
}

TEST(Slicing, NyquistToneCancels) {
  std::vector<double> x(800);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 2 == 0) ? 1.0 : -1.0;
  for (double v : slice_integrate(make_trace(x), 500.0, 500.0)) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Slicing, RejectsBadDurations) {
  const auto t = make_trace(std::vector<double>(100, 1.0));
  EXPECT_THROW(slice_integrate(t, 0.0, 500.0), std::invalid_argument);
  EXPECT_THROW(slice_integrate(t, 500.0, -1.0), std::invalid_argument);
  EXPECT_THROW(slice_integrate(t, 10.0, 0.0), std::invalid_argument);
  EXPECT_THROW(slice_integrate(make_trace(std::vector<double>(4, 1.0)), 500.0, 500.0), std::invalid_argument);
}

TEST(Binarize, SignRule) {
  const std::vector<double> v = {0.3, -0.2, 0.0};
  const auto b = binarize(v);
  EXPECT_EQ(b.bits, (std::vector<std::uint8_t>{1, 0, 0}));
}

TEST(Binarize, NegationFlipsNonzeroValues) {
  const auto t = white(5000, 8);
  std::vector<double> neg(t.samples.size());
  for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -t.samples[i];
  const auto a = binarize(t.samples);
  const auto b = binarize(neg);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.bits[i] ^ b.bits[i], 1);
}

TEST(Binarize, CarriesMetadata) {
  const std::vector<double> v = {1.0, -1.0};
  const auto b = binarize(v, 500.0, 250.0, 3, StreamRole::conjugate);
  EXPECT_EQ(b.source_channel, 3);
  EXPECT_EQ(b.role, StreamRole::conjugate);
  EXPECT_DOUBLE_EQ(b.buffer_ns, 250.0);
}

TEST(Squeezing, IdenticalTracesAreFloored) {
  const auto p = white(100000, 9);
  const auto shot = white(100000, 10);
  const auto e = estimate_squeezing(p, p, shot, 1e6, 100e3);
  EXPECT_TRUE(e.floored);
  EXPECT_EQ(e.db, kSqueezingFloorDb);
}

TEST(Squeezing, VacuumReadsZeroDb) {
  const auto p = white(400000, 11);
  const auto c = white(400000, 12);
  const auto shot = white(400000, 13);
  const auto e = estimate_squeezing(p, c, shot, 1e6, 100e3);
  EXPECT_FALSE(e.floored);
  EXPECT_NEAR(e.db, 0.0, 0.3);
}

TEST(Squeezing, KnownAttenuation) {
  // Scale the difference by sqrt(0.5): exactly -3.01 dB on average.
  auto p = white(400000, 14);
  auto c = white(400000, 15);
  const auto shot = white(400000, 16);
  const double k = std::sqrt(0.5);
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    const double s = (p.samples[i] + c.samples[i]) / 2.0;
    const double d = (p.samples[i] - c.samples[i]) / 2.0 * k;
    p.samples[i] = s + d;
    c.samples[i] = s - d;
  }
  EXPECT_NEAR(estimate_squeezing(p, c, shot, 1e6, 200e3).db, -3.0103, 0.3);
}

TEST(Squeezing, RejectsMismatchedInputs) {
  const auto a = white(50000, 1);
  const auto b = white(40000, 2);
  EXPECT_THROW(estimate_squeezing(a, b, a, 1e6, 100e3), std::invalid_argument);
  EXPECT_THROW(estimate_squeezing(a, a, a, 7.99e6, 100e3), std::invalid_argument);
}

TEST(BitCorrelation, KnownSequences) {
  BitStream alt;
  for (int i = 0; i < 2000; ++i) alt.bits.push_back(static_cast<std::uint8_t>(i % 2));
  EXPECT_NEAR(adjacent_bit_correlation(alt), -1.0, 1e-12);
  BitStream pairs;
  for (int i = 0; i < 2000; ++i) pairs.bits.push_back(static_cast<std::uint8_t>((i / 2) % 2));
  EXPECT_NEAR(adjacent_bit_correlation(pairs), 0.0, 1e-3);
  BitStream constant;
  constant.bits.assign(2000, 1);
  EXPECT_THROW(adjacent_bit_correlation(constant), std::invalid_argument);
  BitStream short_stream;
  short_stream.bits.assign(999, 0);
  EXPECT_THROW(adjacent_bit_correlation(short_stream), std::invalid_argument);
}

}  // namespace
}  // namespace twinkey
