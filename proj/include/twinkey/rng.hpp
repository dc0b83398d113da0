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

#include <cstdint>
#include <random>

namespace twinkey {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of an independent random substream, derived from the master seed and
/// a (channel, stream) counter pair. Channel 0 is reserved for shot-noise
/// reference traces.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t channel, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64((channel << 8) ^ stream ^ 0x5457'4b59'0000'0000ULL));
}

/// Standard normal deviates. std::normal_distribution is deterministic for a
/// given standard library, which is all the reproducibility contract needs.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double operator()() { return dist_(engine_); }

  template <typename It>
  void fill(It first, It last) {
    for (; first != last; ++first) *first = dist_(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace twinkey
