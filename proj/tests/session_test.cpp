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

#include "twinkey/session.hpp"

#include <gtest/gtest.h>

#include "twinkey/config.hpp"

namespace twinkey {
namespace {

SessionConfig quick(std::size_t channels, std::uint64_t seed = 5, double duration = 0.01) {
  RunConfig c = RunConfig::reference();
  c.set_channel_count(channels);
  c.seed = seed;
  c.duration_s = duration;
  c.pipeline.run_battery = false;
  return c.session();
}

TEST(Session, SingleChannelIsTwoParty) {
  const auto r = run_session(quick(1));
  ASSERT_EQ(r.channels.size(), 1u);
  ASSERT_EQ(r.parties.size(), 2u);
  EXPECT_EQ(r.parties[0].name, "Alice");
  EXPECT_EQ(r.parties[1].name, "Bob");
  EXPECT_EQ(r.sender_key.bits, r.channels[0].probe_bits.bits);
  EXPECT_EQ(r.reconstructed_key.bits, r.channels[0].conjugate_bits.bits);
  ASSERT_EQ(r.agreement.subsets.size(), 1u);
  EXPECT_EQ(r.agreement.full_set().result.fraction, r.agreement.pairwise.entry[0][0].fraction);
  EXPECT_EQ(r.predicted_full_set, r.agreement.pairwise.entry[0][0].fraction);
}

TEST(Session, KeysAndSharesFlowThroughTheChannel) {
  const auto r = run_session(quick(3));
  const auto conjs = r.conjugate_streams();
  EXPECT_EQ(r.reconstructed_key.bits, form_key(conjs).bits);
  EXPECT_EQ(r.sender_key.bits, form_key(r.probe_streams()).bits);
  std::size_t sends = 0, recvs = 0;
  for (const auto& rec : r.transcript.records()) {
    if (rec.kind != "message") continue;
    EXPECT_EQ(rec.digest.size(), 64u);
    sends += rec.label.rfind("send", 0) == 0;
    recvs += rec.label.rfind("recv", 0) == 0;
  }
  EXPECT_EQ(sends, 4u);  // two shares to Bob, two keys to the auditor
  EXPECT_EQ(recvs, 4u);
  EXPECT_EQ(r.parties[3].name, "Diana");
}

TEST(Session, TranscriptIsDeterministic) {
  const auto a = run_session(quick(2, 8));
  const auto b = run_session(quick(2, 8));
  const auto c = run_session(quick(2, 9));
  EXPECT_EQ(a.transcript.text(), b.transcript.text());
  EXPECT_EQ(a.transcript.json(), b.transcript.json());
  EXPECT_NE(a.transcript.digest(), c.transcript.digest());
  EXPECT_EQ(a.sender_key.bits, b.sender_key.bits);
}

TEST(Session, BitCountsAndRate) {
  const auto r = run_session(quick(1, 5, 0.02));
  // 320000 samples minus one filter length each side, in 16-sample periods.
  const std::size_t taps = BandpassFilter(FilterSpec{}, 16e6).length();
  EXPECT_EQ(r.bit_count, slice_count(320000 - 2 * taps, 8, 8));
  EXPECT_NEAR(r.bit_rate_bps, static_cast<double>(r.bit_count) / 0.02, 1e-6);
}

TEST(Session, TenChannels) {
  const auto r = run_session(quick(10, 3, 0.02));
  ASSERT_EQ(r.channels.size(), 10u);
  EXPECT_EQ(r.agreement.subsets.size(), 1023u);
  EXPECT_EQ(r.parties.back().name, "Receiver 10");
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < 10; ++j) {
      if (i != j) EXPECT_GT(r.agreement.pairwise.entry[i][i].fraction, r.agreement.pairwise.entry[i][j].fraction);
    }
  }
}

TEST(Session, KeepsTracesOnRequest) {
  auto cfg = quick(2);
  EXPECT_TRUE(run_session(cfg).traces.empty());
  cfg.keep_traces = true;
  const auto r = run_session(cfg);
  ASSERT_EQ(r.traces.size(), 5u);
  EXPECT_EQ(r.traces[0].role, Role::shot_noise);
  EXPECT_EQ(r.traces[3].role, Role::probe);
  EXPECT_EQ(r.traces[3].channel_id, 2);
}

TEST(Session, BatteryCoversEveryStream) {
  auto cfg = quick(2);
  cfg.pipeline.run_battery = true;
  const auto r = run_session(cfg);
  ASSERT_EQ(r.randomness.size(), 4u);
  EXPECT_EQ(r.randomness[0].stream_label, "P1");
  EXPECT_EQ(r.randomness[3].stream_label, "C2");
  EXPECT_EQ(r.battery_applicable(), 44u);
}

TEST(Session, ErrorsAreStageTagged) {
  auto cfg = quick(1);
  cfg.synth.duration_s = 0.0005;  // shorter than three filter lengths
  try {
    run_session(cfg);
    FAIL() << "expected a pipeline error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "pipeline");
    EXPECT_EQ(std::string(e.what()).rfind("[pipeline] ", 0), 0u);
  }
  cfg = quick(1);
  cfg.synth.channels.clear();
  try {
    run_session(cfg);
    FAIL() << "expected a config error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "config");
  }
}

TEST(ClassicalChannel, FifoPerRecipient) {
  SessionTranscript log;
  ClassicalChannel wire(log);
  wire.send({"A", "B", "one", bits_from_string("1")});
  wire.send({"A", "C", "two", bits_from_string("0")});
  wire.send({"A", "B", "three", bits_from_string("11")});
  EXPECT_EQ(wire.receive("B")->label, "one");
  EXPECT_EQ(wire.receive("B")->label, "three");
  EXPECT_FALSE(wire.receive("B").has_value());
  EXPECT_EQ(wire.pending(), 1u);
  EXPECT_EQ(log.records().size(), 5u);
  EXPECT_NE(log.text().find("A -> B | send one | 1 bits | sha256="), std::string::npos);
}

}  // namespace
}  // namespace twinkey
