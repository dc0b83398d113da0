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

// Minimal library use: two channels, short record, print the agreement
// tables and the predicted full-set recovery.

#include <iostream>

#include "twinkey/harness.hpp"

int main() {
  twinkey::RunConfig cfg = twinkey::RunConfig::reference();
  cfg.set_channel_count(2);
  cfg.duration_s = 0.02;
  cfg.pipeline.run_battery = false;

  const twinkey::SessionResult r = twinkey::run_session(cfg.session());

  std::cout << twinkey::render_pairwise_table(r.agreement.pairwise) << '\n'
            << twinkey::render_subset_table(r.agreement.subsets) << '\n'
            << "predicted from diagonal: " << 100.0 * r.predicted_full_set << " %\n";
  for (const auto& m : r.transcript.records()) {
    if (m.kind == "message") std::cout << m.from << " -> " << m.to << "  " << m.label << "  " << m.digest.substr(0, 12) << '\n';
  }
  return 0;
}
