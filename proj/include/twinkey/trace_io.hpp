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

// "TWKY" trace container:
//   magic[4] "TWKY" | u32 version | f64 sample_rate_hz | i32 channel_id |
//   u32 role | u64 seed | u64 sample count | f64 samples[count]
// All fields little-endian. A loaded trace is valid over its full length.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "twinkey/binary_io.hpp"
#include "twinkey/trace_synth.hpp"

namespace twinkey {

inline constexpr std::uint32_t kTraceVersion = 1;

inline void write_twky(std::ostream& os, const QuadratureTrace& t) {
  os.write("TWKY", 4);
  binary::put_u32(os, kTraceVersion);
  binary::put_f64(os, t.sample_rate_hz);
  binary::put_i32(os, t.channel_id);
  binary::put_u32(os, static_cast<std::uint32_t>(t.role));
  binary::put_u64(os, t.seed);
  binary::put_u64(os, t.samples.size());
  for (double v : t.samples) binary::put_f64(os, v);
}

inline QuadratureTrace read_twky(std::istream& is) {
  binary::expect_magic(is, "TWKY");
  const auto version = binary::get_u32(is, "version");
  if (version != kTraceVersion) throw std::runtime_error("TWKY: unsupported version " + std::to_string(version));
  QuadratureTrace t;
  t.sample_rate_hz = binary::get_f64(is, "sample_rate_hz");
  t.channel_id = binary::get_i32(is, "channel_id");
  t.role = role_from_code(binary::get_u32(is, "role"));
  t.seed = binary::get_u64(is, "seed");
  const auto count = binary::get_u64(is, "sample count");
  if (count > (std::uint64_t{1} << 32)) throw std::runtime_error("TWKY: implausible sample count");
  t.samples.resize(count);
  for (auto& v : t.samples) v = binary::get_f64(is, "samples");
  t.valid_begin = 0;
  t.valid_end = t.samples.size();
  return t;
}

/// sample_index,value rows for plotting; `limit` caps the row count.
inline void write_trace_csv(std::ostream& os, const QuadratureTrace& t,
                            std::size_t limit = std::numeric_limits<std::size_t>::max()) {
  os << "sample_index,value\n" << std::setprecision(17);
  const std::size_t n = std::min(limit, t.samples.size());
  for (std::size_t i = 0; i < n; ++i) os << i << ',' << t.samples[i] << '\n';
}

}  // namespace twinkey
