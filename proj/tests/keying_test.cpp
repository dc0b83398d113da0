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

#include "twinkey/keying.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "oracles.hpp"

namespace twinkey {
namespace {

BitStream random_stream(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  BitStream s;
  for (std::size_t i = 0; i < n; ++i) s.bits.push_back(static_cast<std::uint8_t>(eng() & 1u));
  return s;
}

/// Copy of `s` with each bit flipped independently with probability 1 - p.
BitStream noisy_copy(const BitStream& s, double p, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::bernoulli_distribution flip(1.0 - p);
  BitStream out = s;
  for (auto& b : out.bits) b ^= static_cast<std::uint8_t>(flip(eng));
  return out;
}

TEST(FormKey, Examples) {
  const std::vector<BitStream> two = {bits_from_string("0011"), bits_from_string("0101")};
  EXPECT_EQ(form_key(two).bits, bits_from_string("0110").bits);
  EXPECT_EQ(form_key(two).role, StreamRole::combined);
  const std::vector<BitStream> three = {bits_from_string("111"), bits_from_string("101"), bits_from_string("011")};
  EXPECT_EQ(form_key(three).bits, bits_from_string("001").bits);
  const std::vector<BitStream> one = {bits_from_string("10")};
  EXPECT_EQ(form_key(one).bits, one[0].bits);
}

TEST(FormKey, PermutationInvariant) {
  std::vector<BitStream> s = {random_stream(500, 1), random_stream(500, 2), random_stream(500, 3),
                              random_stream(500, 4)};
  const auto ref = form_key(s).bits;
  std::vector<int> order = {0, 1, 2, 3};
  while (std::next_permutation(order.begin(), order.end())) {
    std::vector<BitStream> p;
    for (int i : order) p.push_back(s[static_cast<std::size_t>(i)]);
    ASSERT_EQ(form_key(p).bits, ref);
  }
}

TEST(FormKey, Errors) {
  EXPECT_THROW(form_key(std::vector<BitStream>{}), std::invalid_argument);
  const std::vector<BitStream> bad = {bits_from_string("01"), bits_from_string("011")};
  EXPECT_THROW(form_key(bad), std::invalid_argument);
}

TEST(Agreement, IdenticalAndComplement) {
  const auto a = random_stream(1000, 5);
  auto b = a;
  for (auto& x : b.bits) x ^= 1;
  EXPECT_EQ(agreement(a, a).fraction, 1.0);
  EXPECT_EQ(agreement(a, a).std_dev, 0.0);
  EXPECT_EQ(agreement(a, b).fraction, 0.0);
}

TEST(Agreement, BlockStdDevByHand) {
  // 20 bits, blocks of 2: first block matches fully, the rest match half.
  const auto a = bits_from_string("11111111111111111111");
  const auto b = bits_from_string("11101010101010101010");
  const auto r = agreement(a, b);
  EXPECT_DOUBLE_EQ(r.fraction, 11.0 / 20.0);
  // block fractions {1, .5 x 9}: mean .55, sample sd sqrt((.45^2 + 9 * .05^2) / 9)
  EXPECT_NEAR(r.std_dev, std::sqrt((0.45 * 0.45 + 9 * 0.05 * 0.05) / 9.0), 1e-15);
  EXPECT_THROW(agreement(bits_from_string("1"), bits_from_string("1")), std::invalid_argument);
  EXPECT_THROW(agreement(a, bits_from_string("1")), std::invalid_argument);
}

TEST(AgreementMatrix, DiagonalDominates) {
  std::vector<BitStream> probes, conjugates;
  for (std::uint64_t ch = 0; ch < 3; ++ch) {
    probes.push_back(random_stream(20000, 10 + ch));
    conjugates.push_back(noisy_copy(probes.back(), 0.87, 20 + ch));
  }
  const auto m = agreement_matrix(probes, conjugates);
  ASSERT_EQ(m.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(m.entry[i][i].fraction, 0.87, 0.015);
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) EXPECT_NEAR(m.entry[i][j].fraction, 0.5, 0.015);
    }
  }
  EXPECT_EQ(m.diagonal().size(), 3u);
  EXPECT_THROW(agreement_matrix(probes, std::vector<BitStream>{}), std::invalid_argument);
}

TEST(Subsets, FullSetRecoversKeyAtXorRate) {
  std::vector<BitStream> probes, conjugates;
  const std::vector<double> p = {0.869, 0.887, 0.886};
  for (std::uint64_t ch = 0; ch < 3; ++ch) {
    probes.push_back(random_stream(200000, 30 + ch));
    conjugates.push_back(noisy_copy(probes.back(), p[ch], 40 + ch));
  }
  const auto rows = subset_report(conjugates, form_key(probes));
  ASSERT_EQ(rows.size(), 7u);
  for (const auto& r : rows) {
    if (r.is_full(3)) {
      EXPECT_EQ(r.label(), "C1+C2+C3");
      const double expect = oracle::parity_enumeration(p);
      EXPECT_NEAR(r.result.fraction, expect, 4.0 * std::sqrt(expect * (1 - expect) / 200000.0));
    } else {
      EXPECT_NEAR(r.result.fraction, 0.5, 0.006) << r.label();
    }
  }
}

TEST(Subsets, Enumeration) {
  const auto s3 = receiver_subsets(3);
  const std::vector<std::vector<int>> expect = {{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
  EXPECT_EQ(s3, expect);
  EXPECT_EQ(receiver_subsets(10).size(), 1023u);
  EXPECT_EQ(receiver_subsets(20).size(), (1u << 20) - 1);
  // Beyond the exhaustive limit: singletons, pairs, full set.
  const auto s25 = receiver_subsets(25);
  EXPECT_EQ(s25.size(), 25u + 300u + 1u);
  EXPECT_EQ(s25.back().size(), 25u);
  EXPECT_TRUE(receiver_subsets(0).empty());
}

TEST(Reports, CsvLayouts) {
  std::vector<BitStream> probes = {bits_from_string("1111111111"), bits_from_string("0000000000")};
  std::vector<BitStream> conjugates = probes;
  AgreementReport r;
  r.pairwise = agreement_matrix(probes, conjugates);
  r.subsets = subset_report(conjugates, form_key(probes));
  std::ostringstream t1, t2;
  write_pairwise_csv(t1, r.pairwise);
  write_subset_csv(t2, r.subsets, 2);
  EXPECT_EQ(t1.str(),
            "probe,C1_pct,C1_sd,C2_pct,C2_sd\n"
            "P1,100.00,0.00,0.00,0.00\n"
            "P2,0.00,0.00,100.00,0.00\n");
  EXPECT_EQ(t2.str(),
            "subset,key,agreement_pct,sd_pct\n"
            "C1,P1+P2,100.00,0.00\n"
            "C2,P1+P2,0.00,0.00\n"
            "C1+C2,P1+P2,100.00,0.00\n");
  EXPECT_EQ(r.full_set().label(), "C1+C2");
}

TEST(Parties, Validation) {
  Party alice{"Alice", PartyRole::sender, {bits_from_string("01"), bits_from_string("10")}};
  EXPECT_NO_THROW(alice.validate(2));
  EXPECT_THROW(alice.validate(3), std::invalid_argument);
  Party bob{"Bob", PartyRole::receiver, {}};
  EXPECT_THROW(bob.validate(2), std::invalid_argument);
  EXPECT_EQ(receiver_name(0), "Bob");
  EXPECT_EQ(receiver_name(2), "Diana");
  EXPECT_EQ(receiver_name(3), "Receiver 4");
}

}  // namespace
}  // namespace twinkey
