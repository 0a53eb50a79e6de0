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

#include "pvqmac/engines.hpp"

#include <bit>
#include <limits>

#include "pvqmac/error.hpp"

namespace pvqmac {

namespace {

using Int128 = __int128;

constexpr Int128 kI64Max = std::numeric_limits<std::int64_t>::max();
constexpr Int128 kI64Min = std::numeric_limits<std::int64_t>::min();

void check_lengths(std::span<const std::int64_t> w, std::span<const std::int64_t> x) {
  if (w.size() != x.size()) {
    throw ArgumentError("weight and input vectors must have equal length");
  }
}

Int128 checked_add(Int128 a, Int128 b) {
  Int128 out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw OverflowError("accumulator overflow beyond 128-bit intermediate range");
  }
  return out;
}

Int128 checked_mul(Int128 a, Int128 b) {
  Int128 out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw OverflowError("product overflow beyond 128-bit intermediate range");
  }
  return out;
}

std::int64_t narrow_to_i64(Int128 v) {
  if (v > kI64Max || v < kI64Min) {
    throw OverflowError("dot product exceeds the signed 64-bit range");
  }
  return static_cast<std::int64_t>(v);
}

Int128 wide_dot(std::span<const std::int64_t> w, std::span<const std::int64_t> x) {
  Int128 acc = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    acc = checked_add(acc, checked_mul(w[j], x[j]));
  }
  return acc;
}

void apply_rho(EngineReport& report, const std::optional<double>& rho) {
  if (rho.has_value()) {
    report.scaled_value = *rho * static_cast<double>(report.value);
  }
}

}  // namespace

std::int64_t reference_dot(std::span<const std::int64_t> w,
                           std::span<const std::int64_t> x) {
  check_lengths(w, x);
  return narrow_to_i64(wide_dot(w, x));
}

EngineReport run_naive_mac(std::span<const std::int64_t> w,
                           std::span<const std::int64_t> x) {
  check_lengths(w, x);
  EngineReport report;
  report.value = narrow_to_i64(wide_dot(w, x));
  report.adds = w.size();
  report.mults = w.size();
  return report;
}

EngineReport run_zero_skip_mac(std::span<const std::int64_t> w,
                               std::span<const std::int64_t> x) {
  check_lengths(w, x);
  EngineReport report;
  Int128 acc = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] == 0) continue;
    acc = checked_add(acc, checked_mul(w[j], x[j]));
    ++report.adds;
    ++report.mults;
  }
  report.value = narrow_to_i64(acc);
  return report;
}

EngineReport run_accumulator(std::span<const std::int64_t> codes,
                             std::span<const std::int64_t> x,
                             std::optional<double> rho) {
  check_lengths(codes, x);
  EngineReport report;
  Int128 acc = 0;
  for (std::size_t j = 0; j < codes.size(); ++j) {
    if (codes[j] == 0) continue;
    // |codes_j| repeated adds (or subs); the sum is formed exactly.
    acc = checked_add(acc, checked_mul(codes[j], x[j]));
    if (codes[j] > 0) {
      report.adds += static_cast<std::uint64_t>(codes[j]);
    } else {
      report.subs += static_cast<std::uint64_t>(-codes[j]);
    }
  }
  report.value = narrow_to_i64(acc);
  apply_rho(report, rho);
  return report;
}

EngineReport run_blmac(const DigitMatrix& plan, std::span<const std::int64_t> x,
                       const BlmacOptions& options) {
  if (plan.n() != x.size()) {
    throw ArgumentError("digit plan and input vector must have equal length");
  }
  EngineReport report;
  report.policy = options.policy;
  const std::uint32_t nb = plan.nb();
  const bool twos = plan.mode() == DigitMode::twos_complement;
  if (options.layer_partials) options.layer_partials->clear();

  auto layer_sum = [&](std::uint32_t layer) {
    Int128 sum = 0;
    const bool negate = twos && layer == nb - 1;
    for (std::uint32_t j = 0; j < plan.n(); ++j) {
      int d = plan.digit(layer, j);
      if (d == 0) continue;
      if (negate) d = -d;
      sum = checked_add(sum, d > 0 ? Int128(x[j]) : -Int128(x[j]));
      if (d > 0) {
        ++report.adds;
      } else {
        ++report.subs;
      }
    }
    return sum;
  };

  if (options.direction == BlmacDirection::msb_first) {
    Int128 acc = 0;
    for (std::uint32_t i = nb; i-- > 0;) {
      acc = checked_add(acc, layer_sum(i));
      if (options.layer_partials) options.layer_partials->push_back(narrow_to_i64(acc));
      if (i > 0) {
        acc = checked_mul(acc, 2);
        ++report.shifts;
      }
    }
    report.value = narrow_to_i64(acc);
  } else {
    // Start at the least significant layer; every right shift retires one
    // result bit, and whatever is left in the accumulator after the last
    // shift is the high part of the result.
    Int128 acc = 0;
    Int128 emitted = 0;
    for (std::uint32_t i = 0; i < nb; ++i) {
      acc = checked_add(acc, layer_sum(i));
      const Int128 bit = acc & 1;
      emitted = checked_add(emitted, checked_mul(bit, Int128(1) << i));
      acc = (acc - bit) / 2;  // arithmetic right shift, exact for signed acc
      ++report.shifts;
      if (options.layer_partials) {
        options.layer_partials->push_back(
            narrow_to_i64(checked_add(emitted, checked_mul(acc, Int128(1) << (i + 1)))));
      }
    }
    report.value =
        narrow_to_i64(checked_add(emitted, checked_mul(acc, Int128(1) << nb)));
  }

  apply_rho(report, options.rho);
  return report;
}

EngineReport run_serial_mac(std::span<const std::int64_t> w,
                            std::span<const std::int64_t> x) {
  check_lengths(w, x);
  EngineReport report;
  report.policy = CyclePolicy::shift_counted;
  Int128 acc = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] == 0) continue;
    const std::uint64_t magnitude =
        w[j] > 0 ? static_cast<std::uint64_t>(w[j])
                 : static_cast<std::uint64_t>(-(w[j] + 1)) + 1;
    const unsigned bits = std::bit_width(magnitude);
    acc = checked_add(acc, checked_mul(w[j], x[j]));
    report.shifts += bits - 1;
    if (w[j] > 0) {
      ++report.adds;
    } else {
      ++report.subs;
    }
  }
  report.value = narrow_to_i64(acc);
  return report;
}

}  // namespace pvqmac
