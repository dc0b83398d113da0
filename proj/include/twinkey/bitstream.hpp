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
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "twinkey/binary_io.hpp"

namespace twinkey {

enum class StreamRole : std::uint8_t { probe = 0, conjugate = 1, combined = 2 };

inline std::string_view to_string(StreamRole r) {
  switch (r) {
    case StreamRole::probe: return "probe";
    case StreamRole::conjugate: return "conjugate";
    case StreamRole::combined: return "combined";
  }
  return "unknown";
}

/// Ordered bits (each element 0 or 1) with the slicing that produced them.
struct BitStream {
  std::vector<std::uint8_t> bits;
  double slice_ns = 0.0;
  double buffer_ns = 0.0;
  int source_channel = 0;
  StreamRole role = StreamRole::probe;

  std::size_t size() const { return bits.size(); }

  double ones_fraction() const {
    if (bits.empty()) return 0.0;
    std::size_t ones = 0;
    for (auto b : bits) ones += b;
    return static_cast<double>(ones) / static_cast<double>(bits.size());
  }

  void validate() const {
    if (bits.empty()) throw std::invalid_argument("BitStream: empty");
    for (auto b : bits) {
      if (b > 1) throw std::invalid_argument("BitStream: element outside {0,1}");
    }
  }
};

/// Packed, most significant bit first; the final byte is zero-padded.
inline std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

inline std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> packed, std::size_t count) {
  if (packed.size() < (count + 7) / 8) throw std::invalid_argument("unpack_bits: not enough bytes");
  std::vector<std::uint8_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = (packed[i / 8] >> (7 - i % 8)) & 1u;
  return out;
}

// "TWKB" container:
//   magic[4] "TWKB" | u32 version | f64 slice_ns | f64 buffer_ns |
//   i32 channel | u32 role | u64 bit count | packed bits (MSB first)
// All fields little-endian.
inline constexpr std::uint32_t kBitStreamVersion = 1;

inline void write_twkb(std::ostream& os, const BitStream& s) {
  os.write("TWKB", 4);
  binary::put_u32(os, kBitStreamVersion);
  binary::put_f64(os, s.slice_ns);
  binary::put_f64(os, s.buffer_ns);
  binary::put_i32(os, s.source_channel);
  binary::put_u32(os, static_cast<std::uint32_t>(s.role));
  binary::put_u64(os, s.bits.size());
  const auto packed = pack_bits(s.bits);
  os.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
}

inline BitStream read_twkb(std::istream& is) {
  binary::expect_magic(is, "TWKB");
  const auto version = binary::get_u32(is, "version");
  if (version != kBitStreamVersion) {
    throw std::runtime_error("TWKB: unsupported version " + std::to_string(version));
  }
  BitStream s;
  s.slice_ns = binary::get_f64(is, "slice_ns");
  s.buffer_ns = binary::get_f64(is, "buffer_ns");
  s.source_channel = binary::get_i32(is, "channel");
  const auto role = binary::get_u32(is, "role");
  if (role > 2) throw std::runtime_error("TWKB: unknown role code " + std::to_string(role));
  s.role = static_cast<StreamRole>(role);
  const auto count = binary::get_u64(is, "bit count");
  std::vector<std::uint8_t> packed((count + 7) / 8);
  binary::read_exact(is, packed.data(), packed.size(), "packed bits");
  s.bits = unpack_bits(packed, count);
  return s;
}

inline std::string encode_twkb(const BitStream& s) {
  std::ostringstream os(std::ios::binary);
  write_twkb(os, s);
  return os.str();
}

/// One '0'/'1' character per bit. Whitespace is ignored on input.
inline void write_bit_text(std::ostream& os, const BitStream& s) {
  std::string line;
  line.reserve(s.bits.size() + 1);
  for (auto b : s.bits) line.push_back(b ? '1' : '0');
  line.push_back('\n');
  os << line;
}

inline BitStream read_bit_text(std::istream& is) {
  BitStream s;
  char c;
  while (is.get(c)) {
    if (c == '0' || c == '1') {
      s.bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (c != ' ' && c != '\n' && c != '\r' && c != '\t') {
      throw std::runtime_error(std::string("bit text: unexpected character '") + c + "'");
    }
  }
  return s;
}

inline BitStream bits_from_string(std::string_view text) {
  std::istringstream is{std::string(text)};
  return read_bit_text(is);
}

/// Reads either container, sniffing the "TWKB" magic.
inline BitStream load_bitstream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char head[4] = {};
  in.read(head, 4);
  const bool packed = in.gcount() == 4 && std::string_view(head, 4) == "TWKB";
  in.clear();
  in.seekg(0);
  BitStream s = packed ? read_twkb(in) : read_bit_text(in);
  if (s.bits.empty()) throw std::runtime_error(path + ": no bits");
  return s;
}

}  // namespace twinkey
