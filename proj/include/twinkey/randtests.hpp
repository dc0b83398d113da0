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

// Statistical randomness battery for bit streams, following the NIST
// SP 800-22 rev. 1a definitions of the tests that apply to ~10^5-bit
// sequences. Each test returns a p-value; a stream passes at alpha = 0.01.

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twinkey/bitstream.hpp"
#include "twinkey/fft.hpp"

namespace twinkey::randtests {

using Bits = std::span<const std::uint8_t>;

inline constexpr double kAlpha = 0.01;

/// Regularized upper incomplete gamma Q(a, x).
inline double igamc(double a, double x) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(a, x);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct TestResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

inline void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

/// Monobit frequency test.
inline TestResult frequency(Bits bits) {
  require(bits.size() >= 100, "frequency: need at least 100 bits");
  long long s = 0;
  for (auto b : bits) s += b ? 1 : -1;
  const double s_obs = std::abs(static_cast<double>(s)) / std::sqrt(static_cast<double>(bits.size()));
  return {s_obs, std::erfc(s_obs / std::sqrt(2.0))};
}

inline TestResult block_frequency(Bits bits, std::size_t block) {
  require(block > 0 && bits.size() >= block, "block_frequency: need at least one block");
  const std::size_t blocks = bits.size() / block;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < blocks; ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < block; ++j) ones += bits[i * block + j];
    const double pi = static_cast<double>(ones) / static_cast<double>(block) - 0.5;
    chi2 += pi * pi;
  }
  chi2 *= 4.0 * static_cast<double>(block);
  return {chi2, igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0)};
}

/// Cumulative sums; `reverse` walks the sequence from its end.
inline TestResult cumulative_sums(Bits bits, bool reverse) {
  require(!bits.empty(), "cumulative_sums: empty input");
  const long long n = static_cast<long long>(bits.size());
  long long s = 0, z = 0;
  for (long long i = 0; i < n; ++i) {
    const auto b = bits[static_cast<std::size_t>(reverse ? n - 1 - i : i)];
    s += b ? 1 : -1;
    z = std::max(z, std::llabs(s));
  }
  // Summation limits use the reference implementation's integer division.
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double zd = static_cast<double>(z);
  double sum1 = 0.0;
  for (long long k = (-n / z + 1) / 4; k <= (n / z - 1) / 4; ++k) {
    sum1 += normal_cdf((4.0 * k + 1.0) * zd / sqrt_n) - normal_cdf((4.0 * k - 1.0) * zd / sqrt_n);
  }
  double sum2 = 0.0;
  for (long long k = (-n / z - 3) / 4; k <= (n / z - 1) / 4; ++k) {
    sum2 += normal_cdf((4.0 * k + 3.0) * zd / sqrt_n) - normal_cdf((4.0 * k + 1.0) * zd / sqrt_n);
  }
  return {zd, std::clamp(1.0 - sum1 + sum2, 0.0, 1.0)};
}

inline TestResult runs(Bits bits) {
  require(bits.size() >= 2, "runs: need at least 2 bits");
  const double n = static_cast<double>(bits.size());
  std::size_t ones = 0;
  for (auto b : bits) ones += b;
  const double pi = static_cast<double>(ones) / n;
  // Frequency prerequisite: a badly unbalanced sequence fails outright.
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) return {0.0, 0.0};
  std::size_t v = 1;
  for (std::size_t i = 1; i < bits.size(); ++i) v += bits[i] != bits[i - 1];
  const double vd = static_cast<double>(v);
  const double p = std::erfc(std::abs(vd - 2.0 * n * pi * (1.0 - pi)) / (2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi)));
  return {vd, p};
}

/// Longest run of ones in blocks; block size follows the sequence length
/// (8, 128 or 10^4 bits).
inline TestResult longest_run(Bits bits) {
  const std::size_t n = bits.size();
  require(n >= 128, "longest_run: need at least 128 bits");
  std::size_t block;
  int lo, hi;
  std::vector<double> pi;
  if (n < 6272) {
    block = 8, lo = 1, hi = 4;
    pi = {0.2148, 0.3672, 0.2305, 0.2031};
  } else if (n < 750000) {
    block = 128, lo = 4, hi = 9;
    pi = {0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124};
  } else {
    block = 10000, lo = 10, hi = 16;
    pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
  }
  const std::size_t blocks = n / block;
  std::vector<double> counts(pi.size(), 0.0);
  for (std::size_t i = 0; i < blocks; ++i) {
    int longest = 0, run = 0;
    for (std::size_t j = 0; j < block; ++j) {
      run = bits[i * block + j] ? run + 1 : 0;
      longest = std::max(longest, run);
    }
    counts[static_cast<std::size_t>(std::clamp(longest, lo, hi) - lo)] += 1.0;
  }
  double chi2 = 0.0;
  const double nb = static_cast<double>(blocks);
  for (std::size_t k = 0; k < pi.size(); ++k) chi2 += (counts[k] - nb * pi[k]) * (counts[k] - nb * pi[k]) / (nb * pi[k]);
  return {chi2, igamc(static_cast<double>(pi.size() - 1) / 2.0, chi2 / 2.0)};
}

/// Discrete Fourier transform (spectral) test.
inline TestResult spectral(Bits bits) {
  const std::size_t n = bits.size();
  require(n >= 2, "spectral: need at least 2 bits");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = bits[i] ? 1.0 : -1.0;
  RealFft fft(n);
  const auto spec = fft.forward(x);
  const double nd = static_cast<double>(n);
  const double threshold = std::sqrt(std::log(1.0 / 0.05) * nd);
  std::size_t below = 0;
  for (std::size_t k = 0; k < n / 2; ++k) below += std::abs(spec[k]) < threshold;
  const double expected = 0.95 * nd / 2.0;
  const double d = (static_cast<double>(below) - expected) / std::sqrt(nd * 0.95 * 0.05 / 4.0);
  return {d, std::erfc(std::abs(d) / std::sqrt(2.0))};
}

namespace detail {

/// Counts of every overlapping m-bit pattern, wrapping around the end.
inline std::vector<double> pattern_counts(Bits bits, int m) {
  std::vector<double> counts(std::size_t{1} << m, 0.0);
  if (m == 0) return counts;
  const std::size_t n = bits.size();
  const std::size_t mask = (std::size_t{1} << m) - 1;
  std::size_t word = 0;
  for (int j = 0; j < m - 1; ++j) word = (word << 1) | bits[static_cast<std::size_t>(j) % n];
  for (std::size_t i = 0; i < n; ++i) {
    word = ((word << 1) | bits[(i + static_cast<std::size_t>(m) - 1) % n]) & mask;
    counts[word] += 1.0;
  }
  return counts;
}

inline double psi_squared(Bits bits, int m) {
  if (m <= 0) return 0.0;
  const auto counts = pattern_counts(bits, m);
  const double n = static_cast<double>(bits.size());
  double sum = 0.0;
  for (double c : counts) sum += c * c;
  return sum * static_cast<double>(counts.size()) / n - n;
}

inline double phi(Bits bits, int m) {
  if (m == 0) return 0.0;
  const auto counts = pattern_counts(bits, m);
  const double n = static_cast<double>(bits.size());
  double sum = 0.0;
  for (double c : counts) {
    if (c > 0.0) sum += (c / n) * std::log(c / n);
  }
  return sum;
}

}  // namespace detail

inline TestResult approximate_entropy(Bits bits, int m) {
  require(m >= 1 && m < 24 && bits.size() > static_cast<std::size_t>(m), "approximate_entropy: bad block length");
  const double n = static_cast<double>(bits.size());
  const double apen = detail::phi(bits, m) - detail::phi(bits, m + 1);
  const double chi2 = 2.0 * n * (std::log(2.0) - apen);
  return {chi2, igamc(std::ldexp(1.0, m - 1), chi2 / 2.0)};
}

struct SerialResult {
  TestResult first;   // from the first difference of psi^2
  TestResult second;  // from the second difference
};

inline SerialResult serial(Bits bits, int m) {
  require(m >= 2 && m < 24 && bits.size() > static_cast<std::size_t>(m), "serial: bad block length");
  const double p0 = detail::psi_squared(bits, m);
  const double p1 = detail::psi_squared(bits, m - 1);
  const double p2 = detail::psi_squared(bits, m - 2);
  const double del1 = p0 - p1;
  const double del2 = p0 - 2.0 * p1 + p2;
  return {{del1, igamc(std::ldexp(1.0, m - 2), del1 / 2.0)}, {del2, igamc(std::ldexp(1.0, m - 3), del2 / 2.0)}};
}

/// Non-overlapping template matching for one template over `blocks` blocks.
inline TestResult non_overlapping_template(Bits bits, std::span<const std::uint8_t> tmpl, std::size_t blocks) {
  const std::size_t m = tmpl.size();
  require(m > 0 && blocks > 0, "non_overlapping_template: empty template or no blocks");
  const std::size_t block = bits.size() / blocks;
  require(block >= m, "non_overlapping_template: blocks shorter than the template");
  const double mu = static_cast<double>(block - m + 1) / std::ldexp(1.0, static_cast<int>(m));
  const double var = static_cast<double>(block) *
                     (1.0 / std::ldexp(1.0, static_cast<int>(m)) -
                      static_cast<double>(2 * m - 1) / std::ldexp(1.0, static_cast<int>(2 * m)));
  double chi2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto blk = bits.subspan(b * block, block);
    std::size_t hits = 0;
    for (std::size_t i = 0; i + m <= block;) {
      if (std::equal(tmpl.begin(), tmpl.end(), blk.begin() + static_cast<std::ptrdiff_t>(i))) {
        ++hits;
        i += m;
      } else {
        ++i;
      }
    }
    chi2 += (static_cast<double>(hits) - mu) * (static_cast<double>(hits) - mu) / var;
  }
  return {chi2, igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0)};
}

// Battery parameters.
inline constexpr std::size_t kBlockFrequencyBlock = 900;
inline constexpr int kEntropyBlock = 5;
inline constexpr int kSerialBlock = 5;
inline constexpr std::uint8_t kTemplate[] = {0, 0, 0, 0, 0, 0, 0, 0, 1};
inline constexpr std::size_t kTemplateBlocks = 8;

struct TestRecord {
  std::string name;
  bool applicable = false;
  double statistic = 0.0;
  double p_value = 0.0;  // meaningful only when applicable
  std::size_t min_bits = 0;

  bool pass() const { return applicable && p_value >= kAlpha; }
};

struct RandomnessReport {
  std::string stream_label;
  std::size_t bit_count = 0;
  std::vector<TestRecord> records;

  std::size_t applicable() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](auto& r) { return r.applicable; }));
  }
  std::size_t passed() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](auto& r) { return r.pass(); }));
  }
  std::size_t failed() const { return applicable() - passed(); }
};

/// The eleven-result battery. Tests whose minimum length exceeds the input
/// are reported as not applicable.
inline RandomnessReport battery(Bits bits, std::string label = {}) {
  RandomnessReport report;
  report.stream_label = std::move(label);
  report.bit_count = bits.size();
  const std::size_t n = bits.size();
  auto add = [&](std::string name, std::size_t min_bits, auto&& run) {
    TestRecord rec{std::move(name), false, 0.0, 0.0, min_bits};
    if (n >= min_bits) {
      const TestResult r = run();
      rec.applicable = true;
      rec.statistic = r.statistic;
      rec.p_value = r.p_value;
    }
    report.records.push_back(std::move(rec));
  };
  add("Frequency", 100, [&] { return frequency(bits); });
  add("BlockFrequency", kBlockFrequencyBlock, [&] { return block_frequency(bits, kBlockFrequencyBlock); });
  add("CumulativeSums(forward)", 100, [&] { return cumulative_sums(bits, false); });
  add("CumulativeSums(reverse)", 100, [&] { return cumulative_sums(bits, true); });
  add("Runs", 100, [&] { return runs(bits); });
  add("LongestRun", 128, [&] { return longest_run(bits); });
  add("DFT", 1000, [&] { return spectral(bits); });
  // m < floor(log2 n) - 5
  add("ApproximateEntropy", std::size_t{1} << (kEntropyBlock + 6), [&] { return approximate_entropy(bits, kEntropyBlock); });
  const std::size_t serial_min = std::size_t{1} << (kSerialBlock + 6);
  std::optional<SerialResult> serial_result;
  auto serial_once = [&] {
    if (!serial_result) serial_result = serial(bits, kSerialBlock);
    return *serial_result;
  };
  add("Serial(1)", serial_min, [&] { return serial_once().first; });
  add("Serial(2)", serial_min, [&] { return serial_once().second; });
  add("NonOverlappingTemplate", kTemplateBlocks * 512,
      [&] { return non_overlapping_template(bits, kTemplate, kTemplateBlocks); });
  return report;
}

inline RandomnessReport battery(const BitStream& stream, std::string label = {}) {
  return battery(Bits(stream.bits), std::move(label));
}

inline void write_report_csv_header(std::ostream& os) { os << "stream,test,applicable,statistic,p_value,pass\n"; }

inline void write_report_csv_rows(std::ostream& os, const RandomnessReport& r) {
  for (const auto& rec : r.records) {
    os << r.stream_label << ',' << rec.name << ',' << (rec.applicable ? 1 : 0) << ',';
    if (rec.applicable) {
      os << std::setprecision(10) << rec.statistic << ',' << std::setprecision(10) << rec.p_value << ',' << (rec.pass() ? 1 : 0);
    } else {
      os << ",,";
    }
    os << '\n';
  }
}

inline void write_report_text(std::ostream& os, const RandomnessReport& r) {
  os << "stream " << (r.stream_label.empty() ? "-" : r.stream_label) << " (" << r.bit_count << " bits)\n";
  for (const auto& rec : r.records) {
    os << "  " << std::left << std::setw(26) << rec.name << std::right;
    if (rec.applicable) {
      os << " p = " << std::fixed << std::setprecision(6) << rec.p_value << (rec.pass() ? "  PASS" : "  FAIL");
    } else {
      os << " not applicable (needs " << rec.min_bits << " bits)";
    }
    os << '\n';
  }
  os << "  passed " << r.passed() << " of " << r.applicable() << " applicable\n";
  os.unsetf(std::ios::fixed);
}

}  // namespace twinkey::randtests
