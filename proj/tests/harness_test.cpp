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

#include "twinkey/harness.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

namespace twinkey {
namespace {

class Harness : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("twinkey_harness_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  RunConfig small(const std::string& name) const {
    RunConfig c = RunConfig::reference();
    c.duration_s = 0.01;
    c.output_dir = root_.string();
    c.run_name = name;
    return c;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  fs::path root_;
};

TEST_F(Harness, SimulateWritesCompleteBundle) {
  const auto r = cmd_simulate(small("a"));
  EXPECT_EQ(r.run_dir, root_ / "a");
  for (const char* f : {"config.ini", "pairwise_agreement.csv", "subset_agreement.csv", "randomness.csv", "randomness.txt",
                        "squeezing.csv", "scatter_ch1.csv", "scatter_ch3.csv", "probe1_series.csv",
                        "integral_histograms.csv", "integral_gaussian_fits.csv", "transcript.txt", "transcript.json",
                        "summary.json", "manifest.txt", "bits/P1.twkb", "bits/C3.txt", "bits/key_sender.twkb",
                        "traces/shot_noise.twky", "traces/conjugate_2.twky"}) {
    EXPECT_TRUE(fs::exists(r.run_dir / f)) << f;
  }
  // Every manifest line is the digest of the file it names.
  std::istringstream manifest(slurp(r.run_dir / "manifest.txt"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(manifest, line)) {
    const auto digest = line.substr(0, 64);
    const auto path = line.substr(66);
    EXPECT_EQ(sha256_file((r.run_dir / path).string()), digest) << path;
    ++lines;
  }
  EXPECT_EQ(lines, 15u + 14u + 7u);  // top-level artifacts, bit files, traces
  EXPECT_EQ(sha256_hex(slurp(r.run_dir / "manifest.txt")), r.manifest_digest);

  const auto summary = nlohmann::json::parse(slurp(r.run_dir / "summary.json"));
  EXPECT_EQ(summary["channels"], 3);
  EXPECT_EQ(summary["per_channel"].size(), 3u);
  EXPECT_EQ(summary["bit_count"], r.session.bit_count);
  EXPECT_EQ(summary["subsets"].back()["subset"], "C1+C2+C3");
}

TEST_F(Harness, SimulateIsReproducibleAndRefusesOverwrite) {
  auto cfg = small("a");
  cfg.write_traces = false;
  const auto a = cmd_simulate(cfg);
  EXPECT_FALSE(fs::exists(a.run_dir / "traces"));
  cfg.run_name = "b";
  const auto b = cmd_simulate(cfg);
  EXPECT_EQ(a.manifest_digest, b.manifest_digest);
  cfg.seed += 1;
  cfg.run_name = "c";
  EXPECT_NE(cmd_simulate(cfg).manifest_digest, a.manifest_digest);
  cfg.run_name = "a";
  try {
    cmd_simulate(cfg);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "output");
  }
}

TEST_F(Harness, ReportRebuildsTablesFromStoredBits) {
  auto cfg = small("r");
  cfg.pipeline.run_battery = false;
  const auto sim = cmd_simulate(cfg);
  const auto rep = cmd_report(sim.run_dir);
  std::ostringstream t1, t2;
  write_pairwise_csv(t1, rep.agreement.pairwise);
  write_subset_csv(t2, rep.agreement.subsets, 3);
  EXPECT_EQ(t1.str(), slurp(sim.run_dir / "pairwise_agreement.csv"));
  EXPECT_EQ(t2.str(), slurp(sim.run_dir / "subset_agreement.csv"));
  EXPECT_THROW(cmd_report(root_ / "nothing"), StageError);
}

TEST_F(Harness, RandtestReadsBothFormats) {
  auto cfg = small("t");
  cfg.write_traces = false;
  const auto sim = cmd_simulate(cfg);
  const auto a = cmd_randtest((sim.run_dir / "bits/P1.twkb").string());
  const auto b = cmd_randtest((sim.run_dir / "bits/P1.txt").string());
  EXPECT_EQ(a.applicable(), 11u);
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i].p_value, b.records[i].p_value);
  EXPECT_EQ(a.stream_label, "P1.twkb");
  EXPECT_THROW(cmd_randtest((root_ / "missing.twkb").string()), StageError);
}

TEST(SweepRange, Parsing) {
  EXPECT_EQ(parse_range("1:3:1"), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(parse_range("-0.5:-2:-0.5"), (std::vector<double>{-0.5, -1, -1.5, -2}));
  EXPECT_EQ(parse_range("250,500,1000"), (std::vector<double>{250, 500, 1000}));
  EXPECT_EQ(parse_range("0:0.3:0.1").size(), 4u);
  EXPECT_THROW(parse_range(""), std::invalid_argument);
  EXPECT_THROW(parse_range(","), std::invalid_argument);
  EXPECT_THROW(parse_range("1:3"), std::invalid_argument);
  EXPECT_THROW(parse_range("1:3:-1"), std::invalid_argument);
  EXPECT_THROW(parse_range("1:3:0"), std::invalid_argument);
}

TEST(Sweep, SqueezingKeepsAntisqueezedVariance) {
  const auto base = RunConfig::reference();
  const auto c = apply_sweep_value(base, "squeezing_db", -3.0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(c.model_for(c.channels[i]).v_plus, base.model_for(base.channels[i]).v_plus, 1e-12);
    EXPECT_NEAR(c.model_for(c.channels[i]).v_minus, variance_from_db(-3.0), 1e-15);
  }
  EXPECT_EQ(apply_sweep_value(base, "channels", 5).channels.size(), 5u);
  EXPECT_EQ(apply_sweep_value(base, "slice_ns", 250).pipeline.slice_ns, 250.0);
  EXPECT_EQ(apply_sweep_value(base, "f_hi", 1.5e6).pipeline.filter.f_hi_hz, 1.5e6);
  EXPECT_THROW(apply_sweep_value(base, "channels", 2.5), std::invalid_argument);
}

TEST(Sweep, ChannelSweepFollowsParityTheory) {
  RunConfig base = RunConfig::reference();
  base.duration_s = 0.03;
  base.pipeline.run_battery = false;
  const auto pts = cmd_sweep(base, "channels", {1, 2, 3});
  ASSERT_EQ(pts.size(), 3u);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    // Binomial spread of ~29000 bits is ~0.3 pp; allow 4 sigma.
    EXPECT_NEAR(pts[i].full_set_agreement, pts[i].theory_full_set, 0.012) << i;
    if (i) EXPECT_LT(pts[i].full_set_agreement, pts[i - 1].full_set_agreement);
  }
  std::ostringstream os;
  write_sweep_csv(os, "channels", pts);
  EXPECT_EQ(os.str().substr(0, 16), "parameter,value,");
  EXPECT_THROW(cmd_sweep(base, "colour", {1}), StageError);
  EXPECT_THROW(cmd_sweep(base, "channels", {}), StageError);
}

TEST(PlotData, GaussianFitAndHistogram) {
  const std::vector<double> x = {1, 2, 3, 4};
  const auto g = fit_gaussian(x);
  EXPECT_DOUBLE_EQ(g.mean, 2.5);
  EXPECT_DOUBLE_EQ(g.sigma, std::sqrt(1.25));
  const auto h = histogram(x, g, 8);
  std::size_t total = 0;
  for (const auto& b : h) total += b.count;
  EXPECT_EQ(total, 4u);
  EXPECT_THROW(fit_gaussian(std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_EQ(quadrant(1, 1), 1);
  EXPECT_EQ(quadrant(-1, 1), 2);
  EXPECT_EQ(quadrant(0, 0), 3);
  EXPECT_EQ(quadrant(1, -1), 4);
}

}  // namespace
}  // namespace twinkey
