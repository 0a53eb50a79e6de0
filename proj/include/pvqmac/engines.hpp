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

#ifndef PVQMAC_ENGINES_HPP_
#define PVQMAC_ENGINES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pvqmac/sdr.hpp"

namespace pvqmac {

// Whether a layer shift costs its own clock cycle (shift_counted) or folds
// into the same cycle as an add (shift_folded). Only the bit-serial engines
// ever report shifts.
enum class CyclePolicy { shift_folded, shift_counted };

enum class BlmacDirection { msb_first, lsb_first };

// Exact dot-product result plus the operation breakdown of one engine run.
// Cycles charge one per add or sub, plus one per shift under shift_counted;
// multiplies never cost a separate cycle (a MAC fuses them with its add, and
// the rho rescale happens once, after the dot product).
struct EngineReport {
  std::int64_t value = 0;
  std::optional<double> scaled_value;  // rho * value, when rho was supplied
  std::uint64_t adds = 0;
  std::uint64_t subs = 0;
  std::uint64_t shifts = 0;
  std::uint64_t mults = 0;
  CyclePolicy policy = CyclePolicy::shift_counted;

  std::uint64_t cycles() const {
    return adds + subs + (policy == CyclePolicy::shift_counted ? shifts : 0);
  }
};

// sum_j w_j * x_j in exact wide arithmetic. A result outside the signed
// 64-bit range throws OverflowError instead of wrapping.
std::int64_t reference_dot(std::span<const std::int64_t> w,
                           std::span<const std::int64_t> x);

// One fused multiply-accumulate per element: N cycles.
EngineReport run_naive_mac(std::span<const std::int64_t> w,
                           std::span<const std::int64_t> x);

// Skips zero weights for free: cycles equal the nonzero count.
EngineReport run_zero_skip_mac(std::span<const std::int64_t> w,
                               std::span<const std::int64_t> x);

// Add/sub accumulator: each weight contributes |w_j| repeated additions or
// subtractions of x_j, so adds+subs equals sum|w_j| (the pyramid radius for
// quantized codes). No multiplier; rho only rescales the finished sum.
EngineReport run_accumulator(std::span<const std::int64_t> codes,
                             std::span<const std::int64_t> x,
                             std::optional<double> rho = std::nullopt);

struct BlmacOptions {
  BlmacDirection direction = BlmacDirection::msb_first;
  CyclePolicy policy = CyclePolicy::shift_counted;
  std::optional<double> rho;
  // When set, receives the accumulator value after each processed layer
  // (msb_first only; lsb_first records the running reconstructed value).
  std::vector<std::int64_t>* layer_partials = nullptr;
};

// Bit-layer accumulator: walks the digit plan one layer at a time, adding or
// subtracting x_j per pulse and shifting once per layer transition
// (msb_first: nb-1 shifts; lsb_first: nb shifts, one as each result bit is
// retired). In twos_complement plans the sign layer subtracts; in naf plans
// the digit sign picks add or sub.
EngineReport run_blmac(const DigitMatrix& plan, std::span<const std::int64_t> x,
                       const BlmacOptions& options = {});

// Serial shift-and-add multiplier feeding an accumulator: each nonzero
// weight costs bitlength(|w_j|) cycles (one initial add, then one shift per
// remaining bit position). Always reports under shift_counted.
EngineReport run_serial_mac(std::span<const std::int64_t> w,
                            std::span<const std::int64_t> x);

}  // namespace pvqmac

#endif  // PVQMAC_ENGINES_HPP_
