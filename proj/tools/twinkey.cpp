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

// twinkey: simulate, sweep, randtest, report.
//
// Exit status: 0 on success, 1 on a stage failure (message "[stage] ..."
// on stderr), 2 on a command-line usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "twinkey/harness.hpp"

namespace {

namespace fs = std::filesystem;
using twinkey::RunConfig;

constexpr const char* kOutputDirEnv = "TWINKEY_OUTPUT_DIR";

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::size_t channels = 0;
  std::uint64_t seed = 0;
  double duration = 0.0;
  bool no_filter = false;
  std::string out;
  std::string run_name;
  bool no_traces = false;
  bool no_battery = false;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("-c,--config", o.config_path, "configuration file")->check(CLI::ExistingFile);
  app->add_option("--set", o.sets, "override a configuration key (key=value, or channel.N.key=value)");
  app->add_option("--channels", o.channels, "number of channels")->check(CLI::PositiveNumber);
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--duration", o.duration, "record length in seconds")->check(CLI::PositiveNumber);
  app->add_flag("--no-filter", o.no_filter, "skip the bandpass stage");
  app->add_flag("--no-battery", o.no_battery, "skip the randomness battery");
  app->add_option("-o,--out", o.out, "output directory (overrides " + std::string(kOutputDirEnv) + ")");
}

// Precedence, lowest first: built-in reference, config file, environment
// (output directory only), --set, dedicated flags.
RunConfig resolve(const CommonOptions& o, CLI::App* app) {
  return twinkey::run_stage("config", [&] {
    RunConfig cfg = o.config_path.empty() ? RunConfig::reference() : twinkey::load_config(o.config_path);
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) cfg.output_dir = env;
    for (const auto& kv : o.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      const std::string value = kv.substr(eq + 1);
      std::size_t index = 0;
      char sub[64] = {};
      if (std::sscanf(key.c_str(), "channel.%zu.%63s", &index, sub) == 2) {
        cfg.set_channel(index, sub, value);
      } else {
        cfg.set(key, value);
      }
    }
    if (app->count("--channels")) cfg.set_channel_count(o.channels);
    if (app->count("--seed")) cfg.seed = o.seed;
    if (app->count("--duration")) cfg.duration_s = o.duration;
    if (o.no_filter) cfg.pipeline.apply_filter = false;
    if (o.no_battery) cfg.pipeline.run_battery = false;
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (!o.run_name.empty()) cfg.run_name = o.run_name;
    if (o.no_traces) cfg.write_traces = false;
    cfg.validate();
    return cfg;
  });
}

std::string output_dir_only(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return RunConfig{}.output_dir;
}

void print_run_summary(std::ostream& os, const twinkey::SimulateResult& r) {
  const auto& s = r.session;
  os << "run directory: " << r.run_dir.string() << '\n'
     << "bits per stream: " << s.bit_count << "  (" << s.bit_rate_bps / 1e6 << " Mbit/s)\n\n"
     << "probe/conjugate agreement (%)\n"
     << twinkey::render_pairwise_table(s.agreement.pairwise) << '\n'
     << "receiver subsets vs key (%)\n"
     << twinkey::render_subset_table(s.agreement.subsets) << '\n';
  for (const auto& c : s.channels) {
    os << "channel " << c.channel << ": squeezing " << c.squeezing.db << " dB, witness margin "
       << c.measured_witness.margin << '\n';
  }
  os << "randomness: " << s.battery_passed() << " of " << s.battery_applicable() << " passed\n"
     << "manifest sha256: " << r.manifest_digest << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-channel twin-beam secret sharing simulator"};
  app.require_subcommand(1);

  CommonOptions sim_opts;
  auto* sim = app.add_subcommand("simulate", "run one session and write the artifact bundle");
  add_common(sim, sim_opts);
  sim->add_option("--run-name", sim_opts.run_name, "run directory name (default: timestamp and seed)");
  sim->add_flag("--no-traces", sim_opts.no_traces, "do not write raw traces");

  CommonOptions sweep_opts;
  std::string sweep_param;
  std::string sweep_range;
  std::string sweep_csv;
  auto* sweep = app.add_subcommand("sweep", "run one session per parameter value");
  add_common(sweep, sweep_opts);
  sweep->add_option("parameter", sweep_param, "slice_ns, f_lo, f_hi, squeezing_db or channels")->required();
  sweep->add_option("range", sweep_range, "start:stop:step or v1,v2,... (an empty range is an error)");
  sweep->add_option("--csv", sweep_csv, "CSV path (default: <out>/sweep-<parameter>.csv)");

  std::string rt_path;
  std::string rt_out;
  auto* rt = app.add_subcommand("randtest", "run the randomness battery on a bit stream file");
  rt->add_option("file", rt_path, "TWKB or plain 0/1 text file")->required();
  rt->add_option("-o,--out", rt_out, "output directory for the report");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "re-render the agreement tables of a stored run");
  report->add_option("run_dir", report_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      const RunConfig cfg = resolve(sim_opts, sim);
      print_run_summary(std::cout, twinkey::cmd_simulate(cfg));
    } else if (*sweep) {
      const RunConfig cfg = resolve(sweep_opts, sweep);
      const auto values = twinkey::run_stage("sweep", [&] { return twinkey::parse_range(sweep_range); });
      const auto points = twinkey::cmd_sweep(cfg, sweep_param, values);
      const fs::path csv = sweep_csv.empty() ? fs::path(cfg.output_dir) / ("sweep-" + sweep_param + ".csv") : fs::path(sweep_csv);
      twinkey::run_stage("output", [&] {
        if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
        std::ofstream os(csv);
        if (!os) throw std::runtime_error("cannot write " + csv.string());
        twinkey::write_sweep_csv(os, sweep_param, points);
      });
      twinkey::write_sweep_csv(std::cout, sweep_param, points);
      std::cout << "wrote " << csv.string() << '\n';
    } else if (*rt) {
      const auto rep = twinkey::cmd_randtest(rt_path);
      twinkey::randtests::write_report_text(std::cout, rep);
      const fs::path dir = output_dir_only(rt_out);
      const std::string stem = "randtest-" + fs::path(rt_path).filename().string();
      twinkey::run_stage("output", [&] {
        fs::create_directories(dir);
        std::ofstream csv(dir / (stem + ".csv"));
        std::ofstream txt(dir / (stem + ".txt"));
        if (!csv || !txt) throw std::runtime_error("cannot write report into " + dir.string());
        twinkey::randtests::write_report_csv_header(csv);
        twinkey::randtests::write_report_csv_rows(csv, rep);
        twinkey::randtests::write_report_text(txt, rep);
      });
      std::cout << "wrote " << (dir / (stem + ".csv")).string() << '\n';
    } else if (*report) {
      const auto run = twinkey::cmd_report(report_dir);
      const std::string t1 = twinkey::render_pairwise_table(run.agreement.pairwise);
      const std::string t2 = twinkey::render_subset_table(run.agreement.subsets);
      std::cout << "probe/conjugate agreement (%)\n" << t1 << "\nreceiver subsets vs key (%)\n" << t2;
      twinkey::run_stage("output", [&] {
        std::ofstream(fs::path(report_dir) / "pairwise_agreement.txt") << t1;
        std::ofstream(fs::path(report_dir) / "subset_agreement.txt") << t2;
      });
    }
  } catch (const twinkey::StageError& e) {
    std::cerr << "twinkey: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "twinkey: [internal] " << e.what() << '\n';
    return 1;
  }
  return 0;
}
