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

// End-to-end secret sharing session: synthesize every channel, run the
// measurement pipeline, form the sender's key, pass the receivers' streams
// over an in-process classical channel, recombine, and analyse.

#include <cmath>
#include <deque>
#include <iomanip>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "twinkey/bitstream.hpp"
#include "twinkey/digest.hpp"
#include "twinkey/dsp.hpp"
#include "twinkey/gaussian_model.hpp"
#include "twinkey/keying.hpp"
#include "twinkey/randtests.hpp"
#include "twinkey/trace_io.hpp"
#include "twinkey/trace_synth.hpp"

namespace twinkey {

/// Error raised by a session or harness stage; what() carries the tag.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

template <typename F>
decltype(auto) run_stage(const std::string& stage, F&& f) {
  try {
    return std::forward<F>(f)();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

struct PipelineConfig {
  FilterSpec filter;
  bool apply_filter = true;
  double slice_ns = 500.0;
  double buffer_ns = 500.0;
  double analysis_hz = 1.0e6;
  double analysis_bandwidth_hz = 100.0e3;
  bool run_battery = true;
};

struct SessionConfig {
  SynthConfig synth;
  PipelineConfig pipeline;
  bool keep_traces = false;  // retain raw traces in SessionResult::traces
};

struct TranscriptRecord {
  std::string kind;  // "stage" or "message"
  std::string stage;
  std::string from;
  std::string to;
  std::string label;
  std::string detail;
  std::string digest;
};

/// Ordered log of protocol stages and classical messages. Contains no
/// timestamps, so identical runs produce identical transcripts.
class SessionTranscript {
 public:
  void stage(std::string stage, std::string label, std::string detail = {}, std::string digest = {}) {
    records_.push_back({"stage", std::move(stage), {}, {}, std::move(label), std::move(detail), std::move(digest)});
  }
  void message(std::string from, std::string to, std::string label, std::string digest, std::string detail = {}) {
    records_.push_back({"message", "exchange", std::move(from), std::move(to), std::move(label), std::move(detail),
                        std::move(digest)});
  }

  const std::vector<TranscriptRecord>& records() const { return records_; }

  std::string text() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      os << std::setw(4) << std::setfill('0') << i << std::setfill(' ') << ' ' << r.kind << ' ' << r.stage;
      if (r.kind == "message") os << ' ' << r.from << " -> " << r.to;
      os << " | " << r.label;
      if (!r.detail.empty()) os << " | " << r.detail;
      if (!r.digest.empty()) os << " | sha256=" << r.digest;
      os << '\n';
    }
    return os.str();
  }

  nlohmann::json json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      nlohmann::json j = {{"index", i}, {"kind", r.kind}, {"stage", r.stage}, {"label", r.label}};
      if (r.kind == "message") {
        j["from"] = r.from;
        j["to"] = r.to;
      }
      if (!r.detail.empty()) j["detail"] = r.detail;
      if (!r.digest.empty()) j["sha256"] = r.digest;
      arr.push_back(std::move(j));
    }
    return arr;
  }

  std::string digest() const { return sha256_hex(text()); }

 private:
  std::vector<TranscriptRecord> records_;
};

struct Message {
  std::string from;
  std::string to;
  std::string label;
  BitStream payload;
};

/// In-process classical channel. Delivery is FIFO; every send and receive
/// is written to the transcript with the payload digest.
class ClassicalChannel {
 public:
  explicit ClassicalChannel(SessionTranscript& log) : log_(log) {}

  void send(Message m) {
    log_.message(m.from, m.to, "send " + m.label, sha256_hex(encode_twkb(m.payload)),
                 std::to_string(m.payload.size()) + " bits");
    queue_.push_back(std::move(m));
  }

  /// Oldest pending message addressed to `recipient`.
  std::optional<Message> receive(const std::string& recipient) {
    for (auto it = queue_.begin(); it != queue_.end(); ++it) {
      if (it->to == recipient) {
        Message m = std::move(*it);
        queue_.erase(it);
        log_.message(m.from, m.to, "recv " + m.label, sha256_hex(encode_twkb(m.payload)));
        return m;
      }
    }
    return std::nullopt;
  }

  std::size_t pending() const { return queue_.size(); }

 private:
  SessionTranscript& log_;
  std::deque<Message> queue_;
};

struct ChannelResult {
  int channel = 0;
  ChannelModel model;
  std::vector<double> probe_integrals;
  std::vector<double> conjugate_integrals;
  BitStream probe_bits;
  BitStream conjugate_bits;
  SqueezingEstimate squeezing;
  WitnessResult model_witness{};
  WitnessResult measured_witness{};  // from the estimated squeezed variance
  double predicted_agreement = 0.0;   // sign_agreement of the model correlation
  double integral_correlation = 0.0;  // sample correlation of slice integrals
};

struct SessionResult {
  std::vector<ChannelResult> channels;
  std::vector<Party> parties;  // sender first, then receivers in channel order
  BitStream sender_key;
  BitStream reconstructed_key;
  AgreementReport agreement;
  std::vector<randtests::RandomnessReport> randomness;  // P1, C1, P2, C2, ...
  SessionTranscript transcript;
  std::vector<QuadratureTrace> traces;  // shot, P1, C1, P2, C2, ... when kept
  std::size_t bit_count = 0;
  double duration_s = 0.0;
  double bit_rate_bps = 0.0;
  double predicted_full_set = 0.0;  // xor_agreement of the measured diagonal

  std::vector<BitStream> probe_streams() const {
    std::vector<BitStream> v;
    for (const auto& c : channels) v.push_back(c.probe_bits);
    return v;
  }
  std::vector<BitStream> conjugate_streams() const {
    std::vector<BitStream> v;
    for (const auto& c : channels) v.push_back(c.conjugate_bits);
    return v;
  }
  std::size_t battery_passed() const {
    std::size_t n = 0;
    for (const auto& r : randomness) n += r.passed();
    return n;
  }
  std::size_t battery_applicable() const {
    std::size_t n = 0;
    for (const auto& r : randomness) n += r.applicable();
    return n;
  }
};

inline std::string stream_label(StreamRole role, int channel) {
  return std::string(role == StreamRole::probe ? "P" : "C") + std::to_string(channel);
}

namespace detail {

inline std::string trace_digest(const QuadratureTrace& t) {
  std::ostringstream os(std::ios::binary);
  write_twky(os, t);
  return sha256_hex(os.str());
}

inline std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace detail

/// Runs the whole protocol for `cfg`. Stage failures surface as StageError.
inline SessionResult run_session(const SessionConfig& cfg) {
  SessionResult out;
  auto& log = out.transcript;
  const auto& synth = cfg.synth;
  const auto& pipe = cfg.pipeline;

  run_stage("config", [&] {
    synth.validate();
    if (pipe.apply_filter) pipe.filter.validate(synth.sample_rate_hz);
    if (!(pipe.slice_ns > 0.0) || !(pipe.buffer_ns >= 0.0)) {
      throw std::invalid_argument("slice must be positive and buffer non-negative");
    }
  });
  log.stage("config", "session", "channels=" + std::to_string(synth.channels.size()) +
                                     " duration_s=" + detail::fmt(synth.duration_s) +
                                     " sample_rate_hz=" + detail::fmt(synth.sample_rate_hz, 10) +
                                     " seed=" + std::to_string(synth.master_seed) +
                                     " filter=" + (pipe.apply_filter ? "on" : "off") +
                                     " slice_ns=" + detail::fmt(pipe.slice_ns) +
                                     " buffer_ns=" + detail::fmt(pipe.buffer_ns));

  const QuadratureTrace shot = run_stage("synthesize", [&] { return synth_shot_noise(synth); });
  log.stage("synthesize", "shot-noise reference", {}, detail::trace_digest(shot));
  if (cfg.keep_traces) out.traces.push_back(shot);

  std::optional<BandpassFilter> filter;
  if (pipe.apply_filter) {
    filter.emplace(run_stage("filter-design", [&] { return BandpassFilter(pipe.filter, synth.sample_rate_hz); }));
    log.stage("filter-design", "bandpass",
              "taps=" + std::to_string(filter->length()) + " passband=" + detail::fmt(pipe.filter.f_lo_hz) + ".." +
                  detail::fmt(pipe.filter.f_hi_hz) + " Hz");
  }

  for (std::size_t i = 0; i < synth.channels.size(); ++i) {
    const int ch = static_cast<int>(i + 1);
    const std::string tag = std::to_string(ch);
    ChannelResult res;
    res.channel = ch;
    res.model = synth.channels[i];
    auto [probe, conj] = run_stage("synthesize", [&] { return synth_pair(res.model, synth, ch); });
    log.stage("synthesize", "probe " + tag, {}, detail::trace_digest(probe));
    log.stage("synthesize", "conjugate " + tag, {}, detail::trace_digest(conj));
    log.stage("optical", "Alice keeps probe mode " + tag + "; conjugate mode " + tag + " travels to " +
                             receiver_name(i));

    res.squeezing = run_stage("squeezing", [&] {
      return estimate_squeezing(probe, conj, shot, pipe.analysis_hz, pipe.analysis_bandwidth_hz);
    });
    log.stage("squeezing", "channel " + tag, "estimate_db=" + detail::fmt(res.squeezing.db, 5));

    const auto cov = covariance_from_model(res.model);
    res.model_witness = entanglement_witness(cov);
    res.predicted_agreement = sign_agreement(pearson_correlation(cov));
    if (!res.squeezing.floored) {
      const double v_est = variance_from_db(res.squeezing.db);
      res.measured_witness = {2.0 * v_est < 2.0, 2.0 - 2.0 * v_est, 2.0 * v_est};
    } else {
      res.measured_witness = {true, 2.0, 0.0};
    }

    run_stage("pipeline", [&] {
      const QuadratureTrace p = filter ? filter->apply(probe) : probe;
      const QuadratureTrace c = filter ? filter->apply(conj) : conj;
      res.probe_integrals = slice_integrate(p, pipe.slice_ns, pipe.buffer_ns);
      res.conjugate_integrals = slice_integrate(c, pipe.slice_ns, pipe.buffer_ns);
    });
    res.probe_bits = binarize(res.probe_integrals, pipe.slice_ns, pipe.buffer_ns, ch, StreamRole::probe);
    res.conjugate_bits = binarize(res.conjugate_integrals, pipe.slice_ns, pipe.buffer_ns, ch, StreamRole::conjugate);
    res.integral_correlation = sample_correlation(res.probe_integrals, res.conjugate_integrals);
    log.stage("pipeline", "Alice bits P" + tag, std::to_string(res.probe_bits.size()) + " bits",
              sha256_hex(encode_twkb(res.probe_bits)));
    log.stage("pipeline", receiver_name(i) + " bits C" + tag, std::to_string(res.conjugate_bits.size()) + " bits",
              sha256_hex(encode_twkb(res.conjugate_bits)));
    out.channels.push_back(std::move(res));
    if (cfg.keep_traces) {
      out.traces.push_back(std::move(probe));
      out.traces.push_back(std::move(conj));
    }
  }

  out.bit_count = out.channels.front().probe_bits.size();
  out.duration_s = static_cast<double>(synth.sample_count()) / synth.sample_rate_hz;
  out.bit_rate_bps = static_cast<double>(out.bit_count) / out.duration_s;

  // Parties.
  const std::size_t n = out.channels.size();
  Party alice{"Alice", PartyRole::sender, out.probe_streams()};
  out.parties.push_back(alice);
  for (std::size_t i = 0; i < n; ++i) {
    out.parties.push_back({receiver_name(i), PartyRole::receiver, {out.channels[i].conjugate_bits}});
  }
  run_stage("parties", [&] {
    for (const auto& p : out.parties) p.validate(n);
  });

  out.sender_key = run_stage("key", [&] { return form_key(alice.held_streams); });
  log.stage("key", "Alice forms key from " + std::to_string(n) + " probe stream(s)", {},
            sha256_hex(encode_twkb(out.sender_key)));

  // Receivers pool their streams at the first receiver, who recombines.
  ClassicalChannel wire(log);
  const std::string& combiner = out.parties[1].name;
  for (std::size_t i = 1; i < n; ++i) {
    const auto& p = out.parties[i + 1];
    wire.send({p.name, combiner, "share C" + std::to_string(i + 1), p.held_streams.front()});
  }
  std::vector<BitStream> pooled = {out.parties[1].held_streams.front()};
  while (auto m = wire.receive(combiner)) pooled.push_back(std::move(m->payload));
  out.reconstructed_key = run_stage("reconstruct", [&] { return form_key(pooled); });
  log.stage("reconstruct", combiner + " combines " + std::to_string(pooled.size()) + " share(s)", {},
            sha256_hex(encode_twkb(out.reconstructed_key)));

  // Both keys go to an auditor that only computes statistics.
  wire.send({"Alice", "Auditor", "key", out.sender_key});
  wire.send({combiner, "Auditor", "reconstructed key", out.reconstructed_key});
  while (wire.receive("Auditor")) {
  }

  run_stage("analysis", [&] {
    const auto probes = out.probe_streams();
    const auto conjs = out.conjugate_streams();
    out.agreement.pairwise = agreement_matrix(probes, conjs);
    out.agreement.subsets = subset_report(conjs, out.sender_key);
    out.predicted_full_set = xor_agreement(out.agreement.pairwise.diagonal());
  });
  for (std::size_t i = 0; i < n; ++i) {
    log.stage("analysis", "agreement P" + std::to_string(i + 1) + "/C" + std::to_string(i + 1),
              detail::fmt(out.agreement.pairwise.entry[i][i].fraction, 6));
  }
  log.stage("analysis", "full-set recovery", detail::fmt(out.agreement.full_set().result.fraction, 6));

  if (pipe.run_battery) {
    run_stage("randomness", [&] {
      for (const auto& c : out.channels) {
        out.randomness.push_back(randtests::battery(c.probe_bits, stream_label(StreamRole::probe, c.channel)));
        out.randomness.push_back(randtests::battery(c.conjugate_bits, stream_label(StreamRole::conjugate, c.channel)));
      }
    });
    log.stage("randomness", "battery", "passed " + std::to_string(out.battery_passed()) + " of " +
                                           std::to_string(out.battery_applicable()));
  }
  return out;
}

}  // namespace twinkey
