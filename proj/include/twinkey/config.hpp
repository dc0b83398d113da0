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

// Run configuration: a flat key = value file with one [channel N] section
// per channel. Every key can also be overridden from the command line.
//
//   seed = 2014
//   duration_s = 0.091
//   filter.f_lo_hz = 15000
//
//   [channel 1]
//   squeezing_db = -2.0
//   agreement_target = 0.869

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "twinkey/gaussian_model.hpp"
#include "twinkey/session.hpp"

namespace twinkey {

struct ChannelSpec {
  double squeezing_db = -2.0;
  // Exactly one of these fixes the anti-squeezed variance.
  std::optional<double> agreement_target = 0.869;
  std::optional<double> antisqueezing_db;
};

struct RunConfig {
  std::vector<ChannelSpec> channels;
  double duration_s = 0.091;
  double sample_rate_hz = 16.0e6;
  std::uint64_t seed = 2014;

  // Shape shared by every channel model.
  double squeeze_band_lo_hz = 5.0e3;
  double squeeze_band_hi_hz = 2.5e6;
  double technical_noise_db = 10.0;
  double technical_corner_hz = 15.0e3;

  PipelineConfig pipeline;

  std::string output_dir = "runs";
  std::string run_name;  // empty: derived from timestamp and seed
  bool write_traces = true;

  /// Three channels at -2.0/-2.3/-2.1 dB calibrated to 86.9/88.7/88.6 %.
  static RunConfig reference() {
    RunConfig c;
    c.channels = {{-2.0, 0.869, {}}, {-2.3, 0.887, {}}, {-2.1, 0.886, {}}};
    return c;
  }

  /// Resizes the channel list; new channels cycle through the reference set.
  void set_channel_count(std::size_t n) {
    if (n == 0) throw std::invalid_argument("channels must be >= 1");
    const auto ref = reference().channels;
    const std::size_t old = channels.size();
    channels.resize(n);
    for (std::size_t i = old; i < n; ++i) channels[i] = ref[i % ref.size()];
  }

  ChannelModel model_for(const ChannelSpec& spec) const {
    ChannelModel shape;
    shape.squeeze_band_lo_hz = squeeze_band_lo_hz;
    shape.squeeze_band_hi_hz = squeeze_band_hi_hz;
    shape.technical_noise_db = technical_noise_db;
    shape.technical_corner_hz = technical_corner_hz;
    if (spec.antisqueezing_db) {
      shape.v_minus = variance_from_db(spec.squeezing_db);
      shape.v_plus = variance_from_db(*spec.antisqueezing_db);
      shape.validate();
      return shape;
    }
    if (!spec.agreement_target) throw std::invalid_argument("channel needs agreement_target or antisqueezing_db");
    return calibrate_channel(spec.squeezing_db, *spec.agreement_target, shape);
  }

  SessionConfig session() const {
    SessionConfig s;
    s.synth.duration_s = duration_s;
    s.synth.sample_rate_hz = sample_rate_hz;
    s.synth.master_seed = seed;
    for (const auto& ch : channels) s.synth.channels.push_back(model_for(ch));
    s.pipeline = pipeline;
    return s;
  }

  void validate() const {
    const auto s = session();
    s.synth.validate();
    if (s.pipeline.apply_filter) s.pipeline.filter.validate(sample_rate_hz);
    if (!(pipeline.slice_ns > 0.0) || !(pipeline.buffer_ns >= 0.0)) {
      throw std::invalid_argument("slice_ns must be positive and buffer_ns non-negative");
    }
    if (samples_for_ns(pipeline.slice_ns, sample_rate_hz) == 0) {
      throw std::invalid_argument("slice_ns shorter than one sample");
    }
  }

  /// Applies one top-level key. Unknown keys are errors.
  void set(const std::string& key, const std::string& value);
  /// Applies one key inside a [channel N] section (1-based index).
  void set_channel(std::size_t index, const std::string& key, const std::string& value);

  /// Resolved configuration in the same format it is read from.
  std::string to_ini() const;
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw std::invalid_argument(key + ": not a number: '" + value + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw std::invalid_argument(key + ": not an unsigned integer: '" + value + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw std::invalid_argument(key + ": not a boolean: '" + value + "'");
}

/// Drops a trailing "; ..." or "# ..." comment (preceded by whitespace) and
/// surrounding blanks.
inline std::string strip_inline_comment(const std::string& value) {
  std::size_t end = value.size();
  for (std::size_t i = 1; i < value.size(); ++i) {
    if ((value[i] == ';' || value[i] == '#') && (value[i - 1] == ' ' || value[i - 1] == '\t')) {
      end = i;
      break;
    }
  }
  const std::size_t first = value.find_first_not_of(" \t");
  const std::size_t last = value.find_last_not_of(" \t", end - 1);
  if (first == std::string::npos || end == 0 || last == std::string::npos || last < first) return {};
  return value.substr(first, last - first + 1);
}

}  // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& value) {
  using detail::parse_double;
  auto& f = pipeline.filter;
  if (key == "seed") seed = detail::parse_u64(key, value);
  else if (key == "channels") set_channel_count(static_cast<std::size_t>(detail::parse_u64(key, value)));
  else if (key == "duration_s") duration_s = parse_double(key, value);
  else if (key == "sample_rate_hz") sample_rate_hz = parse_double(key, value);
  else if (key == "squeeze_band_lo_hz") squeeze_band_lo_hz = parse_double(key, value);
  else if (key == "squeeze_band_hi_hz") squeeze_band_hi_hz = parse_double(key, value);
  else if (key == "technical_noise_db") technical_noise_db = parse_double(key, value);
  else if (key == "technical_corner_hz") technical_corner_hz = parse_double(key, value);
  else if (key == "filter.enabled") pipeline.apply_filter = detail::parse_bool(key, value);
  else if (key == "filter.f_lo_hz") f.f_lo_hz = parse_double(key, value);
  else if (key == "filter.f_hi_hz") f.f_hi_hz = parse_double(key, value);
  else if (key == "filter.transition_lo_hz") f.transition_lo_hz = parse_double(key, value);
  else if (key == "filter.transition_hi_hz") f.transition_hi_hz = parse_double(key, value);
  else if (key == "filter.stopband_attenuation_db") f.stopband_attenuation_db = parse_double(key, value);
  else if (key == "slice_ns") pipeline.slice_ns = parse_double(key, value);
  else if (key == "buffer_ns") pipeline.buffer_ns = parse_double(key, value);
  else if (key == "analysis_hz") pipeline.analysis_hz = parse_double(key, value);
  else if (key == "analysis_bandwidth_hz") pipeline.analysis_bandwidth_hz = parse_double(key, value);
  else if (key == "battery") pipeline.run_battery = detail::parse_bool(key, value);
  else if (key == "output_dir") output_dir = value;
  else if (key == "run_name") run_name = value;
  else if (key == "write_traces") write_traces = detail::parse_bool(key, value);
  else throw std::invalid_argument("unknown configuration key '" + key + "'");
}

inline void RunConfig::set_channel(std::size_t index, const std::string& key, const std::string& value) {
  if (index == 0) throw std::invalid_argument("channel sections are numbered from 1");
  if (channels.size() < index) set_channel_count(index);
  auto& ch = channels[index - 1];
  if (key == "squeezing_db") {
    ch.squeezing_db = detail::parse_double(key, value);
  } else if (key == "agreement_target") {
    ch.agreement_target = detail::parse_double(key, value);
    ch.antisqueezing_db.reset();
  } else if (key == "antisqueezing_db") {
    ch.antisqueezing_db = detail::parse_double(key, value);
    ch.agreement_target.reset();
  } else {
    throw std::invalid_argument("unknown channel key '" + key + "'");
  }
}

inline std::string RunConfig::to_ini() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "seed = " << seed << '\n'
     << "duration_s = " << duration_s << '\n'
     << "sample_rate_hz = " << sample_rate_hz << '\n'
     << "squeeze_band_lo_hz = " << squeeze_band_lo_hz << '\n'
     << "squeeze_band_hi_hz = " << squeeze_band_hi_hz << '\n'
     << "technical_noise_db = " << technical_noise_db << '\n'
     << "technical_corner_hz = " << technical_corner_hz << '\n'
     << "filter.enabled = " << (pipeline.apply_filter ? "true" : "false") << '\n'
     << "filter.f_lo_hz = " << pipeline.filter.f_lo_hz << '\n'
     << "filter.f_hi_hz = " << pipeline.filter.f_hi_hz << '\n'
     << "filter.transition_lo_hz = " << pipeline.filter.transition_lo_hz << '\n'
     << "filter.transition_hi_hz = " << pipeline.filter.transition_hi_hz << '\n'
     << "filter.stopband_attenuation_db = " << pipeline.filter.stopband_attenuation_db << '\n'
     << "slice_ns = " << pipeline.slice_ns << '\n'
     << "buffer_ns = " << pipeline.buffer_ns << '\n'
     << "analysis_hz = " << pipeline.analysis_hz << '\n'
     << "analysis_bandwidth_hz = " << pipeline.analysis_bandwidth_hz << '\n'
     << "battery = " << (pipeline.run_battery ? "true" : "false") << '\n'
     << "write_traces = " << (write_traces ? "true" : "false") << '\n';
  for (std::size_t i = 0; i < channels.size(); ++i) {
    os << "\n[channel " << i + 1 << "]\n" << "squeezing_db = " << channels[i].squeezing_db << '\n';
    if (channels[i].agreement_target) os << "agreement_target = " << *channels[i].agreement_target << '\n';
    if (channels[i].antisqueezing_db) os << "antisqueezing_db = " << *channels[i].antisqueezing_db << '\n';
  }
  return os.str();
}

/// Parses the configuration text on top of `base`. Channel sections replace
/// the base channel list entirely.
inline RunConfig parse_config(std::istream& in, RunConfig base = RunConfig::reference()) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config syntax: ") + e.what());
  }
  std::map<std::size_t, const boost::property_tree::ptree*> sections;
  std::optional<std::string> channel_count;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      // The channel count applies after any [channel N] sections.
      const std::string value = detail::strip_inline_comment(node.data());
      if (key == "channels") channel_count = value;
      else base.set(key, value);
      continue;
    }
    std::size_t index = 0;
    if (std::sscanf(key.c_str(), "channel %zu", &index) != 1 || index == 0) {
      throw std::invalid_argument("unknown section [" + key + "]");
    }
    sections[index] = &node;
  }
  if (!sections.empty()) {
    if (sections.rbegin()->first != sections.size()) {
      throw std::invalid_argument("channel sections must be numbered 1..N without gaps");
    }
    base.channels.clear();
    for (const auto& [index, node] : sections) {
      base.channels.push_back(ChannelSpec{});
      for (const auto& [k, v] : *node) base.set_channel(index, k, detail::strip_inline_comment(v.data()));
    }
  }
  if (channel_count) base.set("channels", *channel_count);
  return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = RunConfig::reference()) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return parse_config(in, std::move(base));
}

}  // namespace twinkey
