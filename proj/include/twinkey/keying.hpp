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

// XOR secret sharing over bit streams and the agreement statistics that
// compare a sender's key with its reconstructions.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twinkey/bitstream.hpp"

namespace twinkey {

/// Elementwise XOR (sum modulo two) of equal-length streams.
inline BitStream form_key(std::span<const BitStream> streams) {
  if (streams.empty()) throw std::invalid_argument("form_key: no streams");
  BitStream key = streams.front();
  for (std::size_t s = 1; s < streams.size(); ++s) {
    if (streams[s].size() != key.size()) throw std::invalid_argument("form_key: stream length mismatch");
    for (std::size_t i = 0; i < key.size(); ++i) key.bits[i] ^= streams[s].bits[i];
  }
  if (streams.size() > 1) {
    key.role = StreamRole::combined;
    key.source_channel = 0;
  }
  return key;
}

struct Agreement {
  double fraction = 0.0;
  double std_dev = 0.0;  // spread of the fraction across equal blocks
};

inline constexpr std::size_t kAgreementBlocks = 10;

/// Share of positions where the streams match. std_dev is the sample
/// standard deviation of the match fraction over 10 contiguous equal blocks
/// (any remainder after 10 equal blocks only enters `fraction`).
inline Agreement agreement(const BitStream& a, const BitStream& b) {
  if (a.size() != b.size()) throw std::invalid_argument("agreement: stream length mismatch");
  if (a.size() < kAgreementBlocks) throw std::invalid_argument("agreement: need at least 10 bits");
  const std::size_t n = a.size();
  const std::size_t block = n / kAgreementBlocks;
  std::size_t total = 0;
  std::vector<double> block_fraction(kAgreementBlocks, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool same = a.bits[i] == b.bits[i];
    total += same;
    if (same && i / block < kAgreementBlocks) block_fraction[i / block] += 1.0;
  }
  double mean = 0.0;
  for (double& f : block_fraction) {
    f /= static_cast<double>(block);
    mean += f;
  }
  mean /= static_cast<double>(kAgreementBlocks);
  double ss = 0.0;
  for (double f : block_fraction) ss += (f - mean) * (f - mean);
  return {static_cast<double>(total) / static_cast<double>(n),
          std::sqrt(ss / static_cast<double>(kAgreementBlocks - 1))};
}

struct AgreementMatrix {
  // entry[i][j] compares probe i with conjugate j
  std::vector<std::vector<Agreement>> entry;

  std::size_t size() const { return entry.size(); }
  std::vector<double> diagonal() const {
    std::vector<double> d;
    for (std::size_t i = 0; i < entry.size(); ++i) d.push_back(entry[i][i].fraction);
    return d;
  }
};

inline AgreementMatrix agreement_matrix(std::span<const BitStream> probes, std::span<const BitStream> conjugates) {
  if (probes.size() != conjugates.size() || probes.empty()) {
    throw std::invalid_argument("agreement_matrix: need equal, nonzero stream counts");
  }
  AgreementMatrix m;
  m.entry.resize(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t j = 0; j < conjugates.size(); ++j) m.entry[i].push_back(agreement(probes[i], conjugates[j]));
  }
  return m;
}

struct SubsetRow {
  std::vector<int> members;  // zero-based receiver indices, ascending
  Agreement result;

  std::string label() const {
    std::string s;
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (k) s += '+';
      s += "C" + std::to_string(members[k] + 1);
    }
    return s;
  }
  bool is_full(std::size_t n) const { return members.size() == n; }
};

inline constexpr std::size_t kExhaustiveSubsetLimit = 20;

/// Subsets of `n` receivers in the order singletons, pairs, ..., full set.
/// Above 20 receivers only singletons, pairs and the full set are listed.
inline std::vector<std::vector<int>> receiver_subsets(std::size_t n) {
  std::vector<std::vector<int>> out;
  if (n == 0) return out;
  const bool exhaustive = n <= kExhaustiveSubsetLimit;
  for (std::size_t size = 1; size <= n; ++size) {
    if (!exhaustive && size > 2 && size < n) continue;
    // lexicographic combinations of `size` out of n
    std::vector<int> idx(size);
    for (std::size_t k = 0; k < size; ++k) idx[k] = static_cast<int>(k);
    while (true) {
      out.push_back(idx);
      int k = static_cast<int>(size) - 1;
      while (k >= 0 && idx[static_cast<std::size_t>(k)] == static_cast<int>(n - size) + k) --k;
      if (k < 0) break;
      ++idx[static_cast<std::size_t>(k)];
      for (std::size_t j = static_cast<std::size_t>(k) + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

/// Agreement of XOR(S) with `key` for each receiver subset S.
inline std::vector<SubsetRow> subset_report(std::span<const BitStream> conjugates, const BitStream& key) {
  if (conjugates.empty()) throw std::invalid_argument("subset_report: no receiver streams");
  std::vector<SubsetRow> rows;
  for (auto& members : receiver_subsets(conjugates.size())) {
    std::vector<BitStream> chosen;
    for (int m : members) chosen.push_back(conjugates[static_cast<std::size_t>(m)]);
    rows.push_back({members, agreement(form_key(chosen), key)});
  }
  return rows;
}

struct AgreementReport {
  AgreementMatrix pairwise;
  std::vector<SubsetRow> subsets;

  const SubsetRow& full_set() const {
    for (const auto& r : subsets) {
      if (r.is_full(pairwise.size())) return r;
    }
    throw std::logic_error("AgreementReport: full set missing");
  }
};

inline std::ostream& write_percent(std::ostream& os, const Agreement& a) {
  return os << std::fixed << std::setprecision(2) << 100.0 * a.fraction << ',' << 100.0 * a.std_dev;
}

/// Pairwise layout: one row per probe, two columns (percent, sd) per conjugate.
inline void write_pairwise_csv(std::ostream& os, const AgreementMatrix& m) {
  os << "probe";
  for (std::size_t j = 0; j < m.size(); ++j) os << ",C" << j + 1 << "_pct,C" << j + 1 << "_sd";
  os << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    os << 'P' << i + 1;
    for (std::size_t j = 0; j < m.size(); ++j) write_percent(os << ',', m.entry[i][j]);
    os << '\n';
  }
}

/// Subset layout: one row per receiver subset.
inline void write_subset_csv(std::ostream& os, const std::vector<SubsetRow>& rows, std::size_t n) {
  os << "subset,key";
  os << ",agreement_pct,sd_pct\n";
  std::string key;
  for (std::size_t i = 0; i < n; ++i) key += (i ? "+P" : "P") + std::to_string(i + 1);
  for (const auto& r : rows) write_percent(os << r.label() << ',' << key << ',', r.result) << '\n';
}

enum class PartyRole { sender, receiver };

struct Party {
  std::string name;
  PartyRole role = PartyRole::receiver;
  std::vector<BitStream> held_streams;

  void validate(std::size_t channels) const {
    if (role == PartyRole::sender && held_streams.size() != channels) {
      throw std::invalid_argument(name + ": sender must hold one stream per channel");
    }
    if (role == PartyRole::receiver && held_streams.size() != 1) {
      throw std::invalid_argument(name + ": receiver must hold exactly one stream");
    }
  }
};

/// Bob, Charlie, Diana, then "Receiver 4", "Receiver 5", ...
inline std::string receiver_name(std::size_t index) {
  static const char* const kNames[] = {"Bob", "Charlie", "Diana"};
  if (index < 3) return kNames[index];
  return "Receiver " + std::to_string(index + 1);
}

}  // namespace twinkey
