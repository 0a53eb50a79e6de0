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

#ifndef PVQMAC_SDR_HPP_
#define PVQMAC_SDR_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pvqmac {

// How the digit rows of a plan reconstruct a weight column:
//   binary           d_ij in {0,1},    w_j = sum_i d_ij * 2^i          (w_j >= 0)
//   twos_complement  d_ij in {0,1},    top row weighs -2^(nb-1)
//   naf              d_ij in {-1,0,1}, w_j = sum_i d_ij * 2^i, and no two
//                    adjacent rows of a column are both nonzero
enum class DigitMode { binary, twos_complement, naf };

// An nb x n plan of digits, row i holding the digits of binary weight 2^i.
// Row 0 is the least significant layer; printing helpers emit the most
// significant layer first.
class DigitMatrix {
 public:
  DigitMatrix() = default;
  DigitMatrix(DigitMode mode, std::uint32_t nb, std::uint32_t n);

  DigitMode mode() const { return mode_; }
  std::uint32_t nb() const { return nb_; }
  std::uint32_t n() const { return n_; }

  int digit(std::uint32_t layer, std::uint32_t col) const {
    return digits_[std::size_t{layer} * n_ + col];
  }
  void set_digit(std::uint32_t layer, std::uint32_t col, int value);

  // The weight a column reconstructs under this plan's mode.
  std::int64_t column_value(std::uint32_t col) const;
  std::vector<std::int64_t> reconstruct() const;

  std::uint64_t pulse_count_total() const;

  // Rows printed most significant layer first, e.g. "1 0 0 -1 0 -1".
  std::string to_text() const;

  bool operator==(const DigitMatrix& other) const = default;

 private:
  DigitMode mode_ = DigitMode::binary;
  std::uint32_t nb_ = 0;
  std::uint32_t n_ = 0;
  std::vector<std::int8_t> digits_;
};

// Non-adjacent-form recoding of w, least significant digit first. Digits are
// in {-1,0,+1}, no two adjacent digits are both nonzero, and the final digit
// is nonzero (w = 0 yields an empty sequence). Requires |w| < 2^62.
std::vector<std::int8_t> naf_encode(std::int64_t w);

// Number of nonzero digits in naf_encode(w).
int pulse_count(std::int64_t w);

// Recode a weight vector into a digit plan. width = 0 picks the smallest
// layer count that holds every value (at least 1); a wider explicit width
// zero-pads, a narrower one throws.
DigitMatrix to_digit_matrix(std::span<const std::int64_t> w, DigitMode mode,
                            std::uint32_t width = 0);

struct PulseStats {
  std::uint32_t nb = 0;
  double avg = 0.0;
  std::uint32_t max = 0;
  // Exact enumeration results backing avg: sum of pulse counts over all
  // 2^nb values in [0, 2^nb - 1].
  std::uint64_t sum = 0;
  std::uint64_t count = 0;
};

// Exhaustive pulse statistics over every integer in [0, 2^nb - 1], 1 <= nb <= 24.
PulseStats pulse_stats(std::uint32_t nb);

// avg rounded to two decimals with exact integer arithmetic, ties toward
// zero, formatted like "2.77".
std::string pulse_avg_2dp(const PulseStats& stats);

}  // namespace pvqmac

#endif  // PVQMAC_SDR_HPP_
