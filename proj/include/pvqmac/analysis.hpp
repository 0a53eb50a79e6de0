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

#ifndef PVQMAC_ANALYSIS_HPP_
#define PVQMAC_ANALYSIS_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvqmac/engines.hpp"
#include "pvqmac/pvq.hpp"
#include "pvqmac/rle.hpp"
#include "pvqmac/sdr.hpp"
#include "pvqmac/tensor.hpp"

namespace pvqmac {

// ---------------------------------------------------------------------------
// Weight magnitude histogram.

inline constexpr std::array<const char*, 8> kHistogramBandNames = {
    "0", "pm1", "pm2_3", "pm4_7", "pm8_15", "pm16_31", "pm32_63", "ge64"};

struct HistogramReport {
  // Percentages for |w| in {0}, {1}, {2,3}, {4,7}, {8,15}, {16,31}, {32,63},
  // and everything from 64 up.
  std::array<double, 8> band_pct{};
  std::uint64_t total = 0;
};

HistogramReport weight_histogram(std::span<const std::int64_t> codes);

// ---------------------------------------------------------------------------
// Compression summary: the same codes measured as weight-level run-lengths
// and as bit-layer run-lengths over their naf plan.

struct CompressionRow {
  RleMode mode = RleMode::weight_level;
  std::uint64_t token_count = 0;
  double estimate_bits = 0.0;
  std::uint64_t payload_bits = 0;
  std::uint64_t container_bits = 0;
  double estimate_bits_per_weight = 0.0;
  double payload_bits_per_weight = 0.0;
};

struct CompressionReport {
  std::uint32_t n = 0;
  CompressionRow weight_level;
  CompressionRow bit_layer;
};

CompressionReport compression_report(std::span<const std::int64_t> codes,
                                     std::int64_t q, double rho);

// ---------------------------------------------------------------------------
// Per-layer cycle comparison across the engine models.

struct CycleSettings {
  Rational q_over_n{3, 2};
  // Optional per-layer overrides; empty entries fall back to q_over_n.
  std::vector<std::optional<Rational>> per_layer;
  CyclePolicy policy = CyclePolicy::shift_counted;
};

struct CycleRow {
  std::string label;
  std::uint64_t n = 0;
  std::int64_t q = 0;
  std::uint64_t nz = 0;         // nonzero codes: cycles of the zero-skip MAC
  std::uint64_t ns_pulses = 0;  // bit-layer adds+subs
  std::uint64_t ns_cycles = 0;  // bit-layer cycles under the active policy
  std::uint64_t output_positions = 1;
};

struct CycleTable {
  std::vector<CycleRow> rows;
  CyclePolicy policy = CyclePolicy::shift_counted;
  // Whole-network cycle totals: per-dot-product cycles times output positions.
  std::uint64_t total_mac = 0;
  std::uint64_t total_zero_skip = 0;
  std::uint64_t total_accumulator = 0;
  std::uint64_t total_blmac = 0;
  // Per-weight averages over the raw weight population (sum Q / sum N etc.).
  double adds_per_weight_accumulator = 0.0;
  double pulses_per_weight_blmac = 0.0;
  // The same ratios weighted by output positions, i.e. totals over total MAC
  // work.
  double weighted_adds_per_weight = 0.0;
  double weighted_pulses_per_weight = 0.0;
};

// Quantizes each real-mode layer (integer-mode layers are taken as codes
// as-is) and accounts NZ and bit-layer pulse cycles per layer. Labels default
// to the layer index.
CycleTable cycle_comparison(std::span<const LayerSpec> layers,
                            const CycleSettings& settings,
                            std::span<const std::string> labels = {});

// ---------------------------------------------------------------------------
// FIR filter comparison.

struct FirOpsRow {
  std::uint64_t additions = 0;
  std::uint64_t multiplications = 0;
};

struct FirReport {
  FirOpsRow mac;        // one multiply and add per tap
  FirOpsRow blmac;      // bit-layer pulses of the integer taps, exact result
  FirOpsRow pvq;        // q additions plus the single rescale multiply
  FirOpsRow pvq_blmac;  // bit-layer pulses of the quantized codes
  std::size_t taps = 0;
  std::int64_t q = 0;
  double rho = 0.0;
  std::vector<double> freq_hz;
  std::vector<double> orig_db;
  std::vector<double> pvq_db;
};

// Magnitude response in dB of the given taps over a uniform grid spanning
// [0, fs/2], clamped below at -160 dB.
std::vector<double> fir_frequency_response(std::span<const double> taps,
                                           double sample_rate_hz,
                                           std::size_t grid_points);

// Operation counts for running the taps on each engine, plus the frequency
// responses of the original and quantized taps. Real taps are scaled to
// 16-bit integers (round to nearest even at 32767 / max|tap|) before the
// bit-layer pulse count; integer taps are used as-is.
FirReport fir_compare(const WeightTensor& taps, std::int64_t q,
                      double sample_rate_hz, std::size_t grid_points);

// Symmetric windowed-sinc (Hamming) linear-phase bandpass taps; tap count
// must be odd and at least 3.
std::vector<double> design_bandpass(std::size_t taps, double low_hz, double high_hz,
                                    double sample_rate_hz);

// ---------------------------------------------------------------------------
// CSV / text rendering.

std::string pulse_stats_csv(std::uint32_t nb_max);
std::string histogram_csv(const HistogramReport& report);
std::string histogram_text(const HistogramReport& report);
std::string compression_csv(const CompressionReport& report);
std::string cycles_csv(const CycleTable& table);
std::string cycles_text(const CycleTable& table);
std::string fir_ops_csv(const FirReport& report);
std::string fir_ops_text(const FirReport& report);
std::string response_csv(std::span<const double> freq_hz, std::span<const double> db);

}  // namespace pvqmac

#endif  // PVQMAC_ANALYSIS_HPP_
