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

// Command implementations behind the twinkey tool: simulate, sweep,
// randtest and report. Kept in the library so tests drive them directly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "twinkey/bitstream.hpp"
#include "twinkey/config.hpp"
#include "twinkey/digest.hpp"
#include "twinkey/keying.hpp"
#include "twinkey/randtests.hpp"
#include "twinkey/session.hpp"
#include "twinkey/trace_io.hpp"

namespace twinkey {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Plot data

/// Sample mean and standard deviation: the maximum-likelihood Gaussian fit.
struct GaussianFit {
  double mean = 0.0;
  double sigma = 0.0;
  std::size_t count = 0;

  double density(double x) const {
    const double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  }
};

inline GaussianFit fit_gaussian(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("fit_gaussian: need at least 2 values");
  GaussianFit g;
  g.count = x.size();
  for (double v : x) g.mean += v;
  g.mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - g.mean) * (v - g.mean);
  g.sigma = std::sqrt(ss / static_cast<double>(x.size()));
  return g;
}

struct HistogramBin {
  double lo, hi;
  std::size_t count;
};

/// Equal-width bins spanning mean +/- 4 sigma; values outside are dropped.
inline std::vector<HistogramBin> histogram(std::span<const double> x, const GaussianFit& fit, std::size_t bins = 60) {
  std::vector<HistogramBin> out(bins);
  const double lo = fit.mean - 4.0 * fit.sigma;
  const double width = 8.0 * fit.sigma / static_cast<double>(bins);
  for (std::size_t k = 0; k < bins; ++k) out[k] = {lo + width * static_cast<double>(k), lo + width * static_cast<double>(k + 1), 0};
  for (double v : x) {
    const double pos = (v - lo) / width;
    if (pos >= 0.0 && pos < static_cast<double>(bins)) ++out[static_cast<std::size_t>(pos)].count;
  }
  return out;
}

/// Quadrant of a (probe, conjugate) point; zero coordinates count as
/// negative, matching the binning rule.
inline int quadrant(double probe, double conjugate) {
  const bool p = probe > 0.0;
  const bool c = conjugate > 0.0;
  if (p && c) return 1;
  if (!p && c) return 2;
  if (!p && !c) return 3;
  return 4;
}

inline std::string render_pairwise_table(const AgreementMatrix& m) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << std::setw(6) << "";
  for (std::size_t j = 0; j < m.size(); ++j) os << std::setw(14) << ("C" + std::to_string(j + 1));
  os << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    os << std::setw(6) << ("P" + std::to_string(i + 1));
    for (std::size_t j = 0; j < m.size(); ++j) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(1) << 100.0 * m.entry[i][j].fraction << " +/- " << 100.0 * m.entry[i][j].std_dev;
      os << std::setw(14) << cell.str();
    }
    os << '\n';
  }
  return os.str();
}

inline std::string render_subset_table(const std::vector<SubsetRow>& rows) {
  std::ostringstream os;
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.label().size() + 2);
  os << std::left << std::setw(static_cast<int>(width)) << "subset" << std::right << "agreement with key\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(width)) << r.label() << std::right << std::fixed << std::setprecision(1)
       << 100.0 * r.result.fraction << " +/- " << 100.0 * r.result.std_dev << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateResult {
  fs::path run_dir;
  std::string manifest_digest;
  SessionResult session;
};

inline std::string default_run_name(std::uint64_t seed) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y%m%dT%H%M%SZ") << "-seed" << seed;
  return os.str();
}

namespace detail {

class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path root) : root_(std::move(root)) {}

  std::ofstream open(const std::string& rel, bool binary = false) {
    const fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream os(p, binary ? std::ios::binary : std::ios::out);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    files_.push_back(rel);
    return os;
  }

  void text(const std::string& rel, const std::string& content) { open(rel) << content; }

  /// "<sha256>  <path>" per artifact, sorted by path.
  std::string write_manifest() {
    std::sort(files_.begin(), files_.end());
    std::ostringstream os;
    for (const auto& rel : files_) os << sha256_file((root_ / rel).string()) << "  " << rel << '\n';
    const std::string manifest = os.str();
    std::ofstream(root_ / "manifest.txt", std::ios::binary) << manifest;
    return sha256_hex(manifest);
  }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

inline nlohmann::json agreement_json(const Agreement& a) { return {{"fraction", a.fraction}, {"std_dev", a.std_dev}}; }

}  // namespace detail

inline nlohmann::json summary_json(const RunConfig& cfg, const SessionResult& r) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["channels"] = r.channels.size();
  j["filter"] = cfg.pipeline.apply_filter;
  j["bit_count"] = r.bit_count;
  j["duration_s"] = r.duration_s;
  j["bit_rate_bps"] = r.bit_rate_bps;
  j["transcript_sha256"] = r.transcript.digest();
  auto& chans = j["per_channel"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.channels.size(); ++i) {
    const auto& c = r.channels[i];
    chans.push_back({{"channel", c.channel},
                     {"v_minus", c.model.v_minus},
                     {"v_plus", c.model.v_plus},
                     {"squeezing_estimate_db", c.squeezing.db},
                     {"duan_sum_model", c.model_witness.duan_sum},
                     {"duan_sum_measured", c.measured_witness.duan_sum},
                     {"predicted_agreement", c.predicted_agreement},
                     {"measured_agreement", r.agreement.pairwise.entry[i][i].fraction},
                     {"slice_integral_correlation", c.integral_correlation},
                     {"probe_ones_fraction", c.probe_bits.ones_fraction()},
                     {"conjugate_ones_fraction", c.conjugate_bits.ones_fraction()},
                     {"probe_lag1_correlation", adjacent_bit_correlation(c.probe_bits)},
                     {"conjugate_lag1_correlation", adjacent_bit_correlation(c.conjugate_bits)}});
  }
  auto& pairwise = j["pairwise"] = nlohmann::json::array();
  for (const auto& row : r.agreement.pairwise.entry) {
    auto jr = nlohmann::json::array();
    for (const auto& e : row) jr.push_back(detail::agreement_json(e));
    pairwise.push_back(jr);
  }
  auto& subsets = j["subsets"] = nlohmann::json::array();
  for (const auto& s : r.agreement.subsets) {
    subsets.push_back({{"subset", s.label()}, {"agreement", detail::agreement_json(s.result)}});
  }
  j["full_set_agreement"] = r.agreement.full_set().result.fraction;
  j["predicted_full_set_from_diagonal"] = r.predicted_full_set;
  j["battery_passed"] = r.battery_passed();
  j["battery_applicable"] = r.battery_applicable();
  return j;
}

/// Runs a session and writes the full artifact bundle into a fresh run
/// directory under cfg.output_dir.
inline SimulateResult cmd_simulate(const RunConfig& cfg) {
  run_stage("config", [&] { cfg.validate(); });
  SessionConfig scfg = cfg.session();
  scfg.keep_traces = cfg.write_traces;
  SimulateResult out;
  out.session = run_session(scfg);
  const auto& r = out.session;

  out.run_dir = fs::path(cfg.output_dir) / (cfg.run_name.empty() ? default_run_name(cfg.seed) : cfg.run_name);
  run_stage("output", [&] {
    if (fs::exists(out.run_dir / "manifest.txt")) {
      throw std::runtime_error("run directory " + out.run_dir.string() + " already holds a bundle");
    }
    fs::create_directories(out.run_dir);
    detail::ArtifactWriter w(out.run_dir);
    w.text("config.ini", cfg.to_ini());

    for (const auto& t : r.traces) {
      const std::string name = t.role == Role::shot_noise ? "traces/shot_noise.twky"
                                                          : "traces/" + std::string(to_string(t.role)) + "_" +
                                                                std::to_string(t.channel_id) + ".twky";
      auto os = w.open(name, true);
      write_twky(os, t);
    }

    for (const auto& c : r.channels) {
      for (const BitStream* s : {&c.probe_bits, &c.conjugate_bits}) {
        const std::string label = stream_label(s->role, c.channel);
        auto bin = w.open("bits/" + label + ".twkb", true);
        write_twkb(bin, *s);
        auto txt = w.open("bits/" + label + ".txt");
        write_bit_text(txt, *s);
      }
    }
    {
      auto os = w.open("bits/key_sender.twkb", true);
      write_twkb(os, r.sender_key);
      auto os2 = w.open("bits/key_reconstructed.twkb", true);
      write_twkb(os2, r.reconstructed_key);
    }

    {
      auto os = w.open("pairwise_agreement.csv");
      write_pairwise_csv(os, r.agreement.pairwise);
      auto os2 = w.open("subset_agreement.csv");
      write_subset_csv(os2, r.agreement.subsets, r.channels.size());
    }

    {
      auto csv = w.open("randomness.csv");
      randtests::write_report_csv_header(csv);
      for (const auto& rep : r.randomness) randtests::write_report_csv_rows(csv, rep);
      auto txt = w.open("randomness.txt");
      for (const auto& rep : r.randomness) randtests::write_report_text(txt, rep);
      txt << "total: passed " << r.battery_passed() << " of " << r.battery_applicable() << '\n';
    }

    {
      auto os = w.open("squeezing.csv");
      os << "channel,model_db,estimate_db,v_minus,v_plus,duan_sum_model,margin_model,duan_sum_measured,margin_measured\n"
         << std::setprecision(10);
      for (const auto& c : r.channels) {
        os << c.channel << ',' << squeezing_db(c.model.v_minus) << ',' << c.squeezing.db << ',' << c.model.v_minus << ','
           << c.model.v_plus << ',' << c.model_witness.duan_sum << ',' << c.model_witness.margin << ','
           << c.measured_witness.duan_sum << ',' << c.measured_witness.margin << '\n';
      }
    }

    // Scatter of slice integrals with quadrant labels, and the time series
    // and histogram of the first probe.
    for (const auto& c : r.channels) {
      auto os = w.open("scatter_ch" + std::to_string(c.channel) + ".csv");
      os << "slice,probe,conjugate,quadrant,agree\n" << std::setprecision(10);
      for (std::size_t k = 0; k < c.probe_integrals.size(); ++k) {
        const int q = quadrant(c.probe_integrals[k], c.conjugate_integrals[k]);
        os << k << ',' << c.probe_integrals[k] << ',' << c.conjugate_integrals[k] << ',' << q << ','
           << ((q == 1 || q == 3) ? 1 : 0) << '\n';
      }
    }
    const auto& first = r.channels.front();
    {
      auto os = w.open("probe1_series.csv");
      os << "slice,time_us,integral,bit\n" << std::setprecision(10);
      const double period_us = (cfg.pipeline.slice_ns + cfg.pipeline.buffer_ns) / 1000.0;
      for (std::size_t k = 0; k < std::min<std::size_t>(2000, first.probe_integrals.size()); ++k) {
        os << k << ',' << period_us * static_cast<double>(k) << ',' << first.probe_integrals[k] << ','
           << int(first.probe_bits.bits[k]) << '\n';
      }
    }
    {
      auto hist = w.open("integral_histograms.csv");
      auto fits = w.open("integral_gaussian_fits.csv");
      hist << "stream,bin_lo,bin_hi,count,density,gaussian_density\n" << std::setprecision(10);
      fits << "stream,mean,sigma,count\n" << std::setprecision(10);
      for (const auto& c : r.channels) {
        for (const auto* v : {&c.probe_integrals, &c.conjugate_integrals}) {
          const std::string label = stream_label(v == &c.probe_integrals ? StreamRole::probe : StreamRole::conjugate, c.channel);
          const auto fit = fit_gaussian(*v);
          fits << label << ',' << fit.mean << ',' << fit.sigma << ',' << fit.count << '\n';
          for (const auto& b : histogram(*v, fit)) {
            const double mid = (b.lo + b.hi) / 2.0;
            const double density = static_cast<double>(b.count) / (static_cast<double>(fit.count) * (b.hi - b.lo));
            hist << label << ',' << b.lo << ',' << b.hi << ',' << b.count << ',' << density << ',' << fit.density(mid) << '\n';
          }
        }
      }
    }

    w.text("transcript.txt", r.transcript.text());
    w.text("transcript.json", r.transcript.json().dump(2) + "\n");
    w.text("summary.json", summary_json(cfg, r).dump(2) + "\n");
    out.manifest_digest = w.write_manifest();
  });
  return out;
}

// ---------------------------------------------------------------------------
// sweep

inline const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names = {"slice_ns", "f_lo", "f_hi", "squeezing_db", "channels"};
  return names;
}

/// "start:stop:step" (inclusive, step sign must move start toward stop) or
/// a comma-separated list.
inline std::vector<double> parse_range(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(detail::parse_double("range", item));
    if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:step");
    const double start = parts[0], stop = parts[1], step = parts[2];
    if (step == 0.0 || (stop - start) * step < 0.0) throw std::invalid_argument("range step does not reach stop");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(start + step * static_cast<double>(i));
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(detail::parse_double("range", item));
    }
  }
  if (out.empty()) throw std::invalid_argument("empty sweep range");
  return out;
}

struct SweepPoint {
  double value = 0.0;
  std::size_t channels = 0;
  double full_set_agreement = 0.0;
  double predicted_from_diagonal = 0.0;  // xor_agreement of measured diagonal
  double theory_full_set = 0.0;          // xor_agreement of model sign agreements
  double mean_diagonal = 0.0;
  double key_rate_bps = 0.0;
  std::size_t bit_count = 0;
  std::size_t battery_passed = 0;
  std::size_t battery_applicable = 0;
};

/// Applies one sweep value to a copy of `base`. A squeezing sweep holds
/// every channel's anti-squeezed variance at its base value.
inline RunConfig apply_sweep_value(const RunConfig& base, const std::string& parameter, double value) {
  RunConfig c = base;
  if (parameter == "slice_ns") {
    c.pipeline.slice_ns = value;
  } else if (parameter == "f_lo") {
    c.pipeline.filter.f_lo_hz = value;
  } else if (parameter == "f_hi") {
    c.pipeline.filter.f_hi_hz = value;
  } else if (parameter == "squeezing_db") {
    for (auto& ch : c.channels) {
      const double v_plus = base.model_for(ch).v_plus;
      ch.squeezing_db = value;
      ch.agreement_target.reset();
      ch.antisqueezing_db = squeezing_db(v_plus);
    }
  } else if (parameter == "channels") {
    if (value < 1.0 || value != std::floor(value)) throw std::invalid_argument("channels must be a positive integer");
    c.set_channel_count(static_cast<std::size_t>(value));
  } else {
    throw std::invalid_argument("unknown sweep parameter '" + parameter + "'");
  }
  return c;
}

inline std::vector<SweepPoint> cmd_sweep(const RunConfig& base, const std::string& parameter,
                                         const std::vector<double>& values) {
  if (std::find(sweep_parameters().begin(), sweep_parameters().end(), parameter) == sweep_parameters().end()) {
    throw StageError("sweep", "unknown sweep parameter '" + parameter + "'");
  }
  if (values.empty()) throw StageError("sweep", "empty sweep range");
  std::vector<SweepPoint> out;
  for (double v : values) {
    const RunConfig cfg = run_stage("sweep", [&] { return apply_sweep_value(base, parameter, v); });
    run_stage("config", [&] { cfg.validate(); });
    const SessionConfig scfg = cfg.session();
    const SessionResult r = run_session(scfg);
    SweepPoint p;
    p.value = v;
    p.channels = r.channels.size();
    p.full_set_agreement = r.agreement.full_set().result.fraction;
    p.predicted_from_diagonal = r.predicted_full_set;
    std::vector<double> theory;
    for (const auto& c : r.channels) theory.push_back(c.predicted_agreement);
    p.theory_full_set = xor_agreement(theory);
    const auto diag = r.agreement.pairwise.diagonal();
    for (double d : diag) p.mean_diagonal += d / static_cast<double>(diag.size());
    p.key_rate_bps = r.bit_rate_bps;
    p.bit_count = r.bit_count;
    p.battery_passed = r.battery_passed();
    p.battery_applicable = r.battery_applicable();
    out.push_back(p);
  }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const std::string& parameter, const std::vector<SweepPoint>& points) {
  os << "parameter,value,channels,full_set_agreement,predicted_from_diagonal,theory_full_set,mean_diagonal,key_rate_bps,bit_count,"
        "battery_passed,battery_applicable\n"
     << std::setprecision(10);
  for (const auto& p : points) {
    os << parameter << ',' << p.value << ',' << p.channels << ',' << p.full_set_agreement << ',' << p.predicted_from_diagonal << ','
       << p.theory_full_set << ',' << p.mean_diagonal << ',' << p.key_rate_bps << ',' << p.bit_count << ','
       << p.battery_passed << ',' << p.battery_applicable << '\n';
  }
}

// ---------------------------------------------------------------------------
// randtest / report

inline randtests::RandomnessReport cmd_randtest(const std::string& path) {
  const BitStream s = run_stage("load", [&] { return load_bitstream(path); });
  return randtests::battery(s, fs::path(path).filename().string());
}

struct StoredRun {
  std::vector<BitStream> probes;
  std::vector<BitStream> conjugates;
  AgreementReport agreement;
};

/// Recomputes the agreement tables from the bit streams of a run directory.
inline StoredRun cmd_report(const fs::path& run_dir) {
  return run_stage("report", [&] {
    StoredRun out;
    for (int ch = 1;; ++ch) {
      const fs::path p = run_dir / "bits" / ("P" + std::to_string(ch) + ".twkb");
      const fs::path c = run_dir / "bits" / ("C" + std::to_string(ch) + ".twkb");
      if (!fs::exists(p) || !fs::exists(c)) break;
      out.probes.push_back(load_bitstream(p.string()));
      out.conjugates.push_back(load_bitstream(c.string()));
    }
    if (out.probes.empty()) throw std::runtime_error("no bits/P1.twkb in " + run_dir.string());
    out.agreement.pairwise = agreement_matrix(out.probes, out.conjugates);
    out.agreement.subsets = subset_report(out.conjugates, form_key(out.probes));
    return out;
  });
}

}  // namespace twinkey
