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

#include "pvqmac/sdr.hpp"

#include <bit>
#include <cstdio>
#include <sstream>

#include "pvqmac/error.hpp"

namespace pvqmac {

namespace {

constexpr std::int64_t kMaxWeightMagnitude = std::int64_t{1} << 62;
constexpr std::uint32_t kMaxWidth = 62;

void check_weight_range(std::int64_t w) {
  if (w <= -kMaxWeightMagnitude || w >= kMaxWeightMagnitude) {
    throw ArgumentError("weight magnitude must be below 2^62");
  }
}

// Smallest two's-complement width holding v: bitlength(v)+1 for v >= 0,
// bitlength(~v)+1 for v < 0 (so -1 fits in a single bit).
std::uint32_t twos_complement_width(std::int64_t v) {
  if (v >= 0) return static_cast<std::uint32_t>(std::bit_width(static_cast<std::uint64_t>(v))) + 1;
  return static_cast<std::uint32_t>(std::bit_width(static_cast<std::uint64_t>(~v))) + 1;
}

}  // namespace

DigitMatrix::DigitMatrix(DigitMode mode, std::uint32_t nb, std::uint32_t n)
    : mode_(mode), nb_(nb), n_(n), digits_(std::size_t{nb} * n, 0) {
  if (nb == 0) throw ArgumentError("digit plan needs at least one layer");
  if (nb > kMaxWidth + 1) throw ArgumentError("digit plan width exceeds 64-bit weights");
}

void DigitMatrix::set_digit(std::uint32_t layer, std::uint32_t col, int value) {
  if (value < -1 || value > 1) throw ArgumentError("digits must be in {-1,0,1}");
  if (mode_ != DigitMode::naf && value < 0) {
    throw ArgumentError("negative digits only exist in naf mode");
  }
  digits_[std::size_t{layer} * n_ + col] = static_cast<std::int8_t>(value);
}

std::int64_t DigitMatrix::column_value(std::uint32_t col) const {
  std::int64_t v = 0;
  for (std::uint32_t i = 0; i < nb_; ++i) {
    std::int64_t term = static_cast<std::int64_t>(digit(i, col)) << i;
    if (mode_ == DigitMode::twos_complement && i == nb_ - 1) term = -term;
    v += term;
  }
  return v;
}

std::vector<std::int64_t> DigitMatrix::reconstruct() const {
  std::vector<std::int64_t> out(n_);
  for (std::uint32_t j = 0; j < n_; ++j) out[j] = column_value(j);
  return out;
}

std::uint64_t DigitMatrix::pulse_count_total() const {
  std::uint64_t total = 0;
  for (std::int8_t d : digits_) total += (d != 0);
  return total;
}

std::string DigitMatrix::to_text() const {
  std::ostringstream os;
  for (std::uint32_t i = nb_; i-- > 0;) {
    for (std::uint32_t j = 0; j < n_; ++j) {
      os << static_cast<int>(digit(i, j));
      os << (j + 1 == n_ ? '\n' : ' ');
    }
  }
  return os.str();
}

std::vector<std::int8_t> naf_encode(std::int64_t w) {
  check_weight_range(w);
  std::vector<std::int8_t> digits;
  std::int64_t v = w;
  while (v != 0) {
    if (v & 1) {
      // v mod 4 == 1 keeps the digit positive, 3 flips it negative so the
      // remaining value is divisible by 4 and the next digit stays zero.
      const std::int8_t d = ((v & 3) == 1) ? 1 : -1;
      digits.push_back(d);
      v -= d;
    } else {
      digits.push_back(0);
    }
    v >>= 1;
  }
  return digits;
}

int pulse_count(std::int64_t w) {
  check_weight_range(w);
  int pulses = 0;
  std::int64_t v = w;
  while (v != 0) {
    if (v & 1) {
      v -= ((v & 3) == 1) ? 1 : -1;
      ++pulses;
    }
    v >>= 1;
  }
  return pulses;
}

DigitMatrix to_digit_matrix(std::span<const std::int64_t> w, DigitMode mode,
                            std::uint32_t width) {
  const std::uint32_t n = static_cast<std::uint32_t>(w.size());
  for (std::int64_t v : w) check_weight_range(v);
  if (width > kMaxWidth + 1) throw ArgumentError("requested width exceeds 64-bit weights");

  std::uint32_t need = 1;
  std::vector<std::vector<std::int8_t>> naf_columns;
  switch (mode) {
    case DigitMode::binary:
      for (std::int64_t v : w) {
        if (v < 0) throw ArgumentError("binary digit plans require nonnegative weights");
        need = std::max(need, static_cast<std::uint32_t>(
                                  std::bit_width(static_cast<std::uint64_t>(v))));
      }
      break;
    case DigitMode::twos_complement:
      for (std::int64_t v : w) need = std::max(need, twos_complement_width(v));
      break;
    case DigitMode::naf:
      naf_columns.reserve(w.size());
      for (std::int64_t v : w) {
        naf_columns.push_back(naf_encode(v));
        need = std::max(need, static_cast<std::uint32_t>(naf_columns.back().size()));
      }
      break;
  }

  std::uint32_t nb = need;
  if (width != 0) {
    if (width < need) {
      throw ArgumentError("requested width " + std::to_string(width) +
                          " cannot hold weights needing " + std::to_string(need) +
                          " layers");
    }
    nb = width;
  }

  DigitMatrix plan(mode, nb, n);
  for (std::uint32_t j = 0; j < n; ++j) {
    switch (mode) {
      case DigitMode::binary:
      case DigitMode::twos_complement:
        for (std::uint32_t i = 0; i < nb; ++i) {
          plan.set_digit(i, j, static_cast<int>((w[j] >> i) & 1));
        }
        break;
      case DigitMode::naf: {
        const auto& col = naf_columns[j];
        for (std::uint32_t i = 0; i < col.size(); ++i) plan.set_digit(i, j, col[i]);
        break;
      }
    }
  }
  return plan;
}

PulseStats pulse_stats(std::uint32_t nb) {
  if (nb < 1 || nb > 24) throw ArgumentError("pulse_stats supports widths 1..24");
  PulseStats stats;
  stats.nb = nb;
  stats.count = std::uint64_t{1} << nb;
  for (std::uint64_t w = 0; w < stats.count; ++w) {
    std::uint64_t v = w;
    std::uint32_t pulses = 0;
    while (v != 0) {
      if (v & 1) {
        v += ((v & 3) == 1) ? std::uint64_t(-1) : 1;
        ++pulses;
      }
      v >>= 1;
    }
    stats.sum += pulses;
    if (pulses > stats.max) stats.max = pulses;
  }
  stats.avg = static_cast<double>(stats.sum) / static_cast<double>(stats.count);
  return stats;
}

std::string pulse_avg_2dp(const PulseStats& stats) {
  // floor((sum*100)/count) plus one when the remainder is strictly above a
  // half step; exact halves stay down.
  const unsigned __int128 t = static_cast<unsigned __int128>(stats.sum) * 100;
  std::uint64_t scaled = static_cast<std::uint64_t>(t / stats.count);
  const std::uint64_t rem = static_cast<std::uint64_t>(t % stats.count);
  if (rem * 2 > stats.count) ++scaled;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%llu.%02llu",
                static_cast<unsigned long long>(scaled / 100),
                static_cast<unsigned long long>(scaled % 100));
  return buf;
}

}  // namespace pvqmac
