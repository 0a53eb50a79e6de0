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

#include "pvqmac/rle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <string>

#include "pvqmac/error.hpp"

namespace pvqmac {

namespace {

constexpr char kMagic[4] = {'P', 'V', 'Q', 'B'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint32_t kTopValue = std::uint32_t{1} << 24;
// Keeping totals comfortably below the renormalization floor bounds the
// precision loss per coded symbol.
constexpr std::uint32_t kMaxModelTotal = std::uint32_t{1} << 22;
constexpr std::int64_t kMaxTokenMagnitude = std::numeric_limits<std::int32_t>::max();

constexpr std::size_t kZrunAlphabet = 66;  // 0..63, escape, end-of-run
constexpr std::size_t kWmagAlphabet = 65;  // (0 unused), 1..63, escape

std::uint16_t zrun_symbol(std::uint32_t zrun) {
  return zrun < 64 ? static_cast<std::uint16_t>(zrun) : kZrunEscape;
}

std::uint16_t wmag_symbol(std::uint64_t magnitude) {
  return magnitude < 64 ? static_cast<std::uint16_t>(magnitude) : kWmagEscape;
}

std::uint64_t token_magnitude(const RunToken& t) {
  return t.w >= 0 ? static_cast<std::uint64_t>(t.w) : static_cast<std::uint64_t>(-t.w);
}

void validate_token(const RunToken& t, RleMode mode) {
  if (t.is_eor()) {
    if (t.zrun != 0) throw DataError("end-of-run marker must be the pair (0,0)");
    return;
  }
  if (mode == RleMode::bit_layer && t.w != 1 && t.w != -1) {
    throw DataError("bit-layer runs carry only +1 or -1 pulses");
  }
  if (token_magnitude(t) > static_cast<std::uint64_t>(kMaxTokenMagnitude)) {
    throw DataError("run value magnitude exceeds the 32-bit container limit");
  }
}

// ---------------------------------------------------------------------------
// Byte-level container plumbing.

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

 private:
  void need(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw DataError("truncated container at byte offset " + std::to_string(pos_));
    }
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Renormalizing range coder, 32-bit range over a 33-bit low register; carries
// propagate backward through the already emitted bytes.

class RangeEncoder {
 public:
  void encode(std::uint32_t cum, std::uint32_t freq, std::uint32_t total) {
    const std::uint32_t r = range_ / total;
    low_ += std::uint64_t(r) * cum;
    range_ = r * freq;
    while (range_ < kTopValue) {
      shift_low();
      range_ <<= 8;
    }
  }

  void encode_raw32(std::uint32_t value) {
    encode(value >> 16, 1, std::uint32_t{1} << 16);
    encode(value & 0xFFFFu, 1, std::uint32_t{1} << 16);
  }

  void encode_sign(bool negative) { encode(negative ? 1 : 0, 1, 2); }

  std::vector<std::uint8_t> finish() {
    for (int i = 0; i < 4; ++i) shift_low();
    return std::move(out_);
  }

 private:
  void shift_low() {
    if (low_ >> 32) {
      for (std::size_t i = out_.size(); i-- > 0;) {
        if (++out_[i] != 0) break;
      }
      low_ &= 0xFFFFFFFFull;
    }
    out_.push_back(static_cast<std::uint8_t>(low_ >> 24));
    low_ = (low_ << 8) & 0xFFFFFFFFull;
  }

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  RangeDecoder(std::span<const std::uint8_t> bytes, std::size_t offset)
      : bytes_(bytes), pos_(offset) {
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
  }

  std::uint32_t decode_freq(std::uint32_t total) {
    r_ = range_ / total;
    const std::uint32_t v = code_ / r_;
    return v < total ? v : total - 1;
  }

  void decode_update(std::uint32_t cum, std::uint32_t freq) {
    code_ -= cum * r_;
    range_ = r_ * freq;
    while (range_ < kTopValue) {
      code_ = (code_ << 8) | next_byte();
      range_ <<= 8;
    }
  }

  std::uint32_t decode_raw32() {
    std::uint32_t hi = decode_freq(std::uint32_t{1} << 16);
    decode_update(hi, 1);
    std::uint32_t lo = decode_freq(std::uint32_t{1} << 16);
    decode_update(lo, 1);
    return (hi << 16) | lo;
  }

  bool decode_sign() {
    const std::uint32_t bit = decode_freq(2);
    decode_update(bit, 1);
    return bit != 0;
  }

 private:
  std::uint8_t next_byte() {
    if (pos_ >= bytes_.size()) {
      throw DataError("range-coded payload truncated at byte offset " +
                      std::to_string(pos_));
    }
    return bytes_[pos_++];
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
  std::uint32_t r_ = 0;
};

// ---------------------------------------------------------------------------

void encode_symbol(RangeEncoder& enc, const FreqTable& table, std::uint16_t id) {
  if (!table.covers(id)) {
    throw ArgumentError("symbol model does not cover symbol id " + std::to_string(id));
  }
  enc.encode(table.cums[id], table.counts[id], table.total);
}

std::uint16_t decode_symbol(RangeDecoder& dec, const FreqTable& table) {
  const std::uint32_t v = dec.decode_freq(table.total);
  // cums is nondecreasing with cums.back() == total; find the owning symbol.
  const auto it = std::upper_bound(table.cums.begin(), table.cums.end(), v);
  const std::uint16_t id = static_cast<std::uint16_t>(it - table.cums.begin() - 1);
  dec.decode_update(table.cums[id], table.counts[id]);
  return id;
}

void count_stream_symbols(const RunLengthStream& s, std::vector<std::uint32_t>& zrun_counts,
                          std::vector<std::uint32_t>& wmag_counts) {
  zrun_counts.assign(kZrunAlphabet, 0);
  wmag_counts.assign(kWmagAlphabet, 0);
  for (const RunToken& t : s.tokens) {
    validate_token(t, s.mode);
    if (t.is_eor()) {
      ++zrun_counts[kZrunEor];
      continue;
    }
    ++zrun_counts[zrun_symbol(t.zrun)];
    if (s.mode == RleMode::weight_level) {
      ++wmag_counts[wmag_symbol(token_magnitude(t))];
    }
  }
}

void serialize_table(ByteWriter& w, const FreqTable& table) {
  std::uint16_t nonzero = 0;
  for (std::uint32_t c : table.counts) nonzero += (c > 0);
  w.u16(nonzero);
  for (std::size_t id = 0; id < table.counts.size(); ++id) {
    if (table.counts[id] == 0) continue;
    w.u16(static_cast<std::uint16_t>(id));
    w.u32(table.counts[id]);
  }
}

FreqTable deserialize_table(ByteReader& r, std::size_t alphabet) {
  FreqTable table;
  table.counts.assign(alphabet, 0);
  const std::uint16_t nonzero = r.u16();
  std::int32_t last_id = -1;
  for (std::uint16_t i = 0; i < nonzero; ++i) {
    const std::uint16_t id = r.u16();
    const std::uint32_t count = r.u32();
    if (id >= alphabet || static_cast<std::int32_t>(id) <= last_id || count == 0) {
      throw DataError("malformed model table at byte offset " + std::to_string(r.pos()));
    }
    last_id = id;
    table.counts[id] = count;
  }
  table.bake();
  if (table.total > kTopValue) {
    throw DataError("model table totals exceed coder precision");
  }
  return table;
}

struct ParsedHeader {
  RunLengthStream skeleton;  // mode, digit_mode, n, layers; no tokens
  StreamHeader header;
  SymbolModel model;
  std::size_t payload_start = 0;
};

ParsedHeader parse_container(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("bad container magic at byte offset 0");
  }
  const std::uint8_t version = r.u8();
  if (version != kVersion) {
    throw DataError("unsupported container version " + std::to_string(version));
  }
  const std::uint8_t mode_byte = r.u8();
  if (mode_byte > 2) {
    throw DataError("unknown container mode byte at offset " + std::to_string(r.pos() - 1));
  }
  ParsedHeader parsed;
  parsed.skeleton.mode = mode_byte == 0 ? RleMode::weight_level : RleMode::bit_layer;
  parsed.skeleton.digit_mode =
      mode_byte == 2 ? DigitMode::twos_complement : DigitMode::naf;
  parsed.skeleton.n = r.u32();
  parsed.header.q = r.u32();
  parsed.header.rho = r.f64();
  parsed.skeleton.layers = r.u8();
  if (parsed.skeleton.mode == RleMode::bit_layer) {
    if (parsed.skeleton.layers == 0 || parsed.skeleton.layers > 63) {
      throw DataError("bit-layer container needs 1..63 layers");
    }
    if (parsed.skeleton.n == 0) throw DataError("bit-layer container needs n >= 1");
  }
  parsed.model.zrun = deserialize_table(r, kZrunAlphabet);
  parsed.model.wmag = deserialize_table(r, kWmagAlphabet);
  parsed.payload_start = r.pos();
  return parsed;
}

}  // namespace

void FreqTable::bake() {
  cums.assign(counts.size() + 1, 0);
  std::uint64_t running = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    cums[i] = static_cast<std::uint32_t>(running);
    running += counts[i];
  }
  if (running > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("model counts overflow 32 bits");
  }
  cums[counts.size()] = static_cast<std::uint32_t>(running);
  total = static_cast<std::uint32_t>(running);
}

RunLengthStream encode_weight_rle(std::span<const std::int64_t> w) {
  if (w.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ArgumentError("weight vector too long for run-length encoding");
  }
  RunLengthStream s;
  s.mode = RleMode::weight_level;
  s.n = static_cast<std::uint32_t>(w.size());
  std::uint32_t zrun = 0;
  for (std::int64_t v : w) {
    if (v == 0) {
      ++zrun;
      continue;
    }
    s.tokens.push_back(RunToken::run(zrun, v));
    zrun = 0;
  }
  s.tokens.push_back(RunToken::eor());
  return s;
}

RunLengthStream encode_bitlayer_rle(const DigitMatrix& plan) {
  if (plan.mode() == DigitMode::binary) {
    throw ArgumentError("bit-layer run-lengths expect a naf or twos-complement plan");
  }
  if (plan.n() == 0) throw ArgumentError("cannot run-length encode an empty plan");
  RunLengthStream s;
  s.mode = RleMode::bit_layer;
  s.digit_mode = plan.mode();
  s.n = plan.n();
  s.layers = plan.nb();
  for (std::uint32_t i = plan.nb(); i-- > 0;) {
    std::uint32_t zrun = 0;
    std::uint32_t next_position = 0;  // position after the last emitted pulse
    for (std::uint32_t j = 0; j < plan.n(); ++j) {
      const int d = plan.digit(i, j);
      if (d == 0) {
        ++zrun;
        continue;
      }
      s.tokens.push_back(RunToken::run(zrun, d));
      zrun = 0;
      next_position = j + 1;
    }
    // A pulse in the final position already marks the row boundary.
    if (next_position != plan.n()) s.tokens.push_back(RunToken::eor());
  }
  return s;
}

std::vector<std::int64_t> decode_weight_rle(const RunLengthStream& s, std::uint32_t n) {
  if (s.mode != RleMode::weight_level) {
    throw ArgumentError("decode_weight_rle expects a weight-level stream");
  }
  std::vector<std::int64_t> out(n, 0);
  std::uint64_t pos = 0;
  bool terminated = false;
  for (const RunToken& t : s.tokens) {
    if (terminated) throw DataError("tokens found after the end-of-run marker");
    validate_token(t, s.mode);
    if (t.is_eor()) {
      terminated = true;
      continue;
    }
    pos += t.zrun;
    if (pos >= n) {
      throw DataError("run of " + std::to_string(t.zrun) + " zeros overflows row of " +
                      std::to_string(n));
    }
    out[pos++] = t.w;
  }
  if (!terminated) throw DataError("stream is missing its end-of-run marker");
  return out;
}

DigitMatrix decode_bitlayer_rle(const RunLengthStream& s) {
  if (s.mode != RleMode::bit_layer) {
    throw ArgumentError("decode_bitlayer_rle expects a bit-layer stream");
  }
  if (s.layers == 0) throw DataError("bit-layer stream declares zero layers");
  if (s.n == 0) throw DataError("bit-layer stream declares zero positions");
  DigitMatrix plan(s.digit_mode, s.layers, s.n);
  std::size_t next = 0;
  for (std::uint32_t row = 0; row < s.layers; ++row) {
    const std::uint32_t layer = s.layers - 1 - row;  // scanned MSB layer first
    std::uint64_t pos = 0;
    while (true) {
      if (next >= s.tokens.size()) {
        throw DataError("stream ends inside layer " + std::to_string(layer));
      }
      const RunToken& t = s.tokens[next++];
      validate_token(t, s.mode);
      if (t.is_eor()) break;
      pos += t.zrun;
      if (pos >= s.n) {
        throw DataError("run overflows layer " + std::to_string(layer) + " of width " +
                        std::to_string(s.n));
      }
      plan.set_digit(layer, static_cast<std::uint32_t>(pos), static_cast<int>(t.w));
      ++pos;
      if (pos == s.n) break;  // implicit end of row
    }
  }
  if (next != s.tokens.size()) {
    throw DataError("stream carries tokens beyond its final layer");
  }
  return plan;
}

SymbolModel build_symbol_model(const RunLengthStream& s) {
  SymbolModel model;
  count_stream_symbols(s, model.zrun.counts, model.wmag.counts);
  for (FreqTable* table : {&model.zrun, &model.wmag}) {
    std::uint64_t total = 0;
    for (std::uint32_t c : table->counts) total += c;
    if (total > kMaxModelTotal) {
      for (std::uint32_t& c : table->counts) {
        if (c == 0) continue;
        c = static_cast<std::uint32_t>(
            std::max<std::uint64_t>(1, (std::uint64_t(c) * kMaxModelTotal) / total));
      }
    }
    table->bake();
  }
  return model;
}

BitEstimate estimate_bits(const RunLengthStream& s) {
  if (s.tokens.empty()) throw ArgumentError("estimate_bits needs a nonempty stream");
  std::vector<std::uint32_t> zrun_counts;
  std::vector<std::uint32_t> wmag_counts;
  count_stream_symbols(s, zrun_counts, wmag_counts);
  std::uint64_t zrun_total = 0;
  std::uint64_t wmag_total = 0;
  for (std::uint32_t c : zrun_counts) zrun_total += c;
  for (std::uint32_t c : wmag_counts) wmag_total += c;

  auto cost = [](std::uint32_t count, std::uint64_t total) {
    return -std::log2(static_cast<double>(count) / static_cast<double>(total));
  };

  BitEstimate est;
  for (const RunToken& t : s.tokens) {
    if (t.is_eor()) {
      est.zrun_bits += cost(zrun_counts[kZrunEor], zrun_total);
      continue;
    }
    const std::uint16_t zs = zrun_symbol(t.zrun);
    est.zrun_bits += cost(zrun_counts[zs], zrun_total);
    if (zs == kZrunEscape) est.escape_raw_bits += 32.0;
    if (s.mode == RleMode::weight_level) {
      const std::uint16_t ws = wmag_symbol(token_magnitude(t));
      est.wmag_bits += cost(wmag_counts[ws], wmag_total);
      if (ws == kWmagEscape) est.escape_raw_bits += 32.0;
    }
    est.sign_bits += 1.0;
  }
  est.bits_per_weight = s.n > 0 ? est.total() / static_cast<double>(s.n) : 0.0;
  return est;
}

std::vector<std::uint8_t> range_encode(const RunLengthStream& s,
                                       const SymbolModel& model,
                                       const StreamHeader& header) {
  if (header.q < 0 || header.q > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("header q must fit an unsigned 32-bit field");
  }
  if (s.mode == RleMode::bit_layer && (s.layers == 0 || s.layers > 63)) {
    throw DataError("bit-layer streams need 1..63 layers");
  }
  if (s.mode == RleMode::bit_layer && s.digit_mode == DigitMode::binary) {
    throw DataError("bit-layer containers hold naf or twos-complement plans");
  }
  // Reject structurally broken streams before any bytes go out.
  if (s.mode == RleMode::weight_level) {
    (void)decode_weight_rle(s, s.n);
  } else {
    (void)decode_bitlayer_rle(s);
  }

  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u8(kVersion);
  std::uint8_t mode_byte = 0;
  if (s.mode == RleMode::bit_layer) {
    mode_byte = s.digit_mode == DigitMode::twos_complement ? 2 : 1;
  }
  w.u8(mode_byte);
  w.u32(s.n);
  w.u32(static_cast<std::uint32_t>(header.q));
  w.f64(header.rho);
  w.u8(static_cast<std::uint8_t>(s.mode == RleMode::bit_layer ? s.layers : 0));
  serialize_table(w, model.zrun);
  serialize_table(w, model.wmag);

  RangeEncoder enc;
  for (const RunToken& t : s.tokens) {
    validate_token(t, s.mode);
    if (t.is_eor()) {
      encode_symbol(enc, model.zrun, kZrunEor);
      continue;
    }
    const std::uint16_t zs = zrun_symbol(t.zrun);
    encode_symbol(enc, model.zrun, zs);
    if (zs == kZrunEscape) enc.encode_raw32(t.zrun);
    if (s.mode == RleMode::weight_level) {
      const std::uint64_t mag = token_magnitude(t);
      const std::uint16_t ws = wmag_symbol(mag);
      encode_symbol(enc, model.wmag, ws);
      if (ws == kWmagEscape) enc.encode_raw32(static_cast<std::uint32_t>(mag));
    }
    enc.encode_sign(t.w < 0);
  }
  std::vector<std::uint8_t> payload = enc.finish();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

DecodedStream range_decode(std::span<const std::uint8_t> bytes) {
  ParsedHeader parsed = parse_container(bytes);
  if (parsed.model.zrun.total == 0) {
    throw DataError("container carries an empty run-length model");
  }
  DecodedStream result;
  result.stream = parsed.skeleton;
  result.header = parsed.header;
  RangeDecoder dec(bytes, parsed.payload_start);

  auto decode_run = [&](std::uint64_t pos_limit, std::uint64_t pos,
                        bool weight_mode) -> std::optional<RunToken> {
    const std::uint16_t zs = decode_symbol(dec, parsed.model.zrun);
    if (zs == kZrunEor) return std::nullopt;
    std::uint32_t zrun = zs;
    if (zs == kZrunEscape) zrun = dec.decode_raw32();
    std::uint64_t magnitude = 1;
    if (weight_mode) {
      if (parsed.model.wmag.total == 0) {
        throw DataError("container lacks the magnitude model its runs need");
      }
      const std::uint16_t ws = decode_symbol(dec, parsed.model.wmag);
      if (ws == 0) throw DataError("decoded magnitude symbol 0 is not a value");
      magnitude = ws;
      if (ws == kWmagEscape) magnitude = dec.decode_raw32();
      if (magnitude == 0) throw DataError("decoded escape magnitude 0 is not a value");
    }
    const bool negative = dec.decode_sign();
    if (pos + zrun >= pos_limit) {
      throw DataError("decoded run overflows its row");
    }
    return RunToken::run(zrun, negative ? -static_cast<std::int64_t>(magnitude)
                                        : static_cast<std::int64_t>(magnitude));
  };

  if (result.stream.mode == RleMode::weight_level) {
    std::uint64_t pos = 0;
    while (true) {
      auto token = decode_run(result.stream.n, pos, true);
      if (!token.has_value()) {
        result.stream.tokens.push_back(RunToken::eor());
        break;
      }
      pos += token->zrun + 1;
      result.stream.tokens.push_back(*token);
    }
  } else {
    for (std::uint32_t row = 0; row < result.stream.layers; ++row) {
      std::uint64_t pos = 0;
      while (true) {
        auto token = decode_run(result.stream.n, pos, false);
        if (!token.has_value()) {
          result.stream.tokens.push_back(RunToken::eor());
          break;
        }
        pos += token->zrun + 1;
        result.stream.tokens.push_back(*token);
        if (pos == result.stream.n) break;  // implicit end of row
      }
    }
  }
  return result;
}

std::size_t payload_offset(std::span<const std::uint8_t> bytes) {
  return parse_container(bytes).payload_start;
}

std::size_t serialized_model_bytes(const SymbolModel& model) {
  std::size_t bytes = 0;
  for (const FreqTable* table : {&model.zrun, &model.wmag}) {
    bytes += 2;
    for (std::uint32_t c : table->counts) {
      if (c > 0) bytes += 6;
    }
  }
  return bytes;
}

}  // namespace pvqmac
