// Copyright 2026 the pvqmac authors
// SPDX-License-Identifier: Apache-2.0
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

#ifndef PVQMAC_RLE_HPP_
#define PVQMAC_RLE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "pvqmac/sdr.hpp"

namespace pvqmac {

enum class RleMode { weight_level, bit_layer };

// A run of `zrun` zeros followed by the nonzero value `w`. The pair (0,0)
// is the end-of-run marker: every remaining position in the row is zero.
struct RunToken {
  std::uint32_t zrun = 0;
  std::int64_t w = 0;

  bool is_eor() const { return w == 0; }
  static RunToken eor() { return RunToken{}; }
  static RunToken run(std::uint32_t zrun, std::int64_t w) { return RunToken{zrun, w}; }

  bool operator==(const RunToken& other) const = default;
};

// Token stream for one weight row (weight_level) or for the rows of a digit
// plan scanned most significant layer first, left to right (bit_layer). In
// bit_layer mode w is always +1 or -1 and a layer whose final position holds
// a pulse carries no explicit end marker: the row boundary implies it.
struct RunLengthStream {
  RleMode mode = RleMode::weight_level;
  // Digit plan interpretation for bit_layer streams (naf or twos_complement).
  DigitMode digit_mode = DigitMode::naf;
  std::uint32_t n = 0;       // positions per row
  std::uint32_t layers = 0;  // row count, bit_layer mode only
  std::vector<RunToken> tokens;

  bool operator==(const RunLengthStream& other) const = default;
};

RunLengthStream encode_weight_rle(std::span<const std::int64_t> w);
RunLengthStream encode_bitlayer_rle(const DigitMatrix& plan);

std::vector<std::int64_t> decode_weight_rle(const RunLengthStream& s, std::uint32_t n);
DigitMatrix decode_bitlayer_rle(const RunLengthStream& s);

// Static per-stream symbol frequencies, split into a run-length model (runs
// 0..63 exact, 64 = escape + 32 raw bits, 65 = end-of-run) and a magnitude
// model for weight_level values (1..63 exact, 64 = escape + 32 raw bits).
// Signs always cost one raw bit per nonzero value.
struct FreqTable {
  std::vector<std::uint32_t> counts;  // indexed by symbol id
  std::vector<std::uint32_t> cums;    // counts.size() + 1 prefix sums
  std::uint32_t total = 0;

  void bake();
  bool covers(std::uint16_t id) const { return id < counts.size() && counts[id] > 0; }
};

struct SymbolModel {
  FreqTable zrun;
  FreqTable wmag;
};

inline constexpr std::uint16_t kZrunEscape = 64;
inline constexpr std::uint16_t kZrunEor = 65;
inline constexpr std::uint16_t kWmagEscape = 64;

// Model as used for coding: exact counts, scaled down proportionally when a
// stream is large enough that totals would crowd the coder's precision.
SymbolModel build_symbol_model(const RunLengthStream& s);

// Information content of the stream under its own exact static model:
// sum of -log2(P) per symbol plus one raw bit per sign and 32 per escape.
struct BitEstimate {
  double zrun_bits = 0.0;
  double wmag_bits = 0.0;
  double sign_bits = 0.0;
  double escape_raw_bits = 0.0;
  double bits_per_weight = 0.0;

  double total() const { return zrun_bits + wmag_bits + sign_bits + escape_raw_bits; }
};

BitEstimate estimate_bits(const RunLengthStream& s);

// Pyramid metadata carried in the container header.
struct StreamHeader {
  std::int64_t q = 0;
  double rho = 0.0;
};

// Container layout (all little-endian):
//   magic "PVQB" | version u8 | mode u8 | n u32 | q u32 | rho f64 |
//   layer count u8 | run-length model table | magnitude model table |
//   range-coded payload
// Mode byte: 0 = weight_level, 1 = bit_layer over a naf plan, 2 = bit_layer
// over a twos-complement plan. Each model table is a u16 symbol count
// followed by (u16 symbol id, u32 count) pairs in ascending id order.
std::vector<std::uint8_t> range_encode(const RunLengthStream& s,
                                       const SymbolModel& model,
                                       const StreamHeader& header);

struct DecodedStream {
  RunLengthStream stream;
  StreamHeader header;
};

DecodedStream range_decode(std::span<const std::uint8_t> bytes);

// Byte offset where the range-coded payload starts (header + model tables
// parsed and validated).
std::size_t payload_offset(std::span<const std::uint8_t> bytes);

// Size in bytes of the two serialized model tables.
std::size_t serialized_model_bytes(const SymbolModel& model);

}  // namespace pvqmac

#endif  // PVQMAC_RLE_HPP_
