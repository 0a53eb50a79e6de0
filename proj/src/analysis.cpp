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

#include "pvqmac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>

#include "pvqmac/error.hpp"

namespace pvqmac {

namespace {

std::string fmt(const char* format, ...) {
  char buf[128];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

int histogram_band(std::uint64_t magnitude) {
  if (magnitude == 0) return 0;
  if (magnitude == 1) return 1;
  if (magnitude <= 3) return 2;
  if (magnitude <= 7) return 3;
  if (magnitude <= 15) return 4;
  if (magnitude <= 31) return 5;
  if (magnitude <= 63) return 6;
  return 7;
}

CompressionRow measure_stream(const RunLengthStream& stream, std::int64_t q, double rho) {
  const BitEstimate estimate = estimate_bits(stream);
  const SymbolModel model = build_symbol_model(stream);
  const std::vector<std::uint8_t> bytes = range_encode(stream, model, {q, rho});
  const std::size_t payload_start = payload_offset(bytes);

  CompressionRow row;
  row.mode = stream.mode;
  row.token_count = stream.tokens.size();
  row.estimate_bits = estimate.total();
  row.payload_bits = (bytes.size() - payload_start) * 8;
  row.container_bits = bytes.size() * 8;
  if (stream.n > 0) {
    row.estimate_bits_per_weight = row.estimate_bits / stream.n;
    row.payload_bits_per_weight = static_cast<double>(row.payload_bits) / stream.n;
  }
  return row;
}

std::uint64_t mul_positions(std::uint64_t cycles, std::uint64_t positions) {
  const unsigned __int128 v = static_cast<unsigned __int128>(cycles) * positions;
  if (v > std::numeric_limits<std::uint64_t>::max()) {
    throw OverflowError("cycle totals exceed 64 bits");
  }
  return static_cast<std::uint64_t>(v);
}

const char* mode_name(RleMode mode) {
  return mode == RleMode::weight_level ? "weight_level" : "bit_layer";
}

}  // namespace

HistogramReport weight_histogram(std::span<const std::int64_t> codes) {
  if (codes.empty()) throw ArgumentError("weight_histogram needs at least one value");
  std::array<std::uint64_t, 8> counts{};
  for (std::int64_t v : codes) {
    const std::uint64_t magnitude =
        v >= 0 ? static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(-(v + 1)) + 1;
    ++counts[histogram_band(magnitude)];
  }
  HistogramReport report;
  report.total = codes.size();
  for (std::size_t b = 0; b < counts.size(); ++b) {
    report.band_pct[b] = 100.0 * static_cast<double>(counts[b]) /
                         static_cast<double>(report.total);
  }
  return report;
}

CompressionReport compression_report(std::span<const std::int64_t> codes,
                                     std::int64_t q, double rho) {
  if (codes.empty()) throw ArgumentError("compression_report needs at least one code");
  CompressionReport report;
  report.n = static_cast<std::uint32_t>(codes.size());
  report.weight_level = measure_stream(encode_weight_rle(codes), q, rho);
  const DigitMatrix plan = to_digit_matrix(codes, DigitMode::naf);
  report.bit_layer = measure_stream(encode_bitlayer_rle(plan), q, rho);
  return report;
}

CycleTable cycle_comparison(std::span<const LayerSpec> layers,
                            const CycleSettings& settings,
                            std::span<const std::string> labels) {
  if (layers.empty()) throw ArgumentError("cycle_comparison needs at least one layer");
  if (!settings.per_layer.empty() && settings.per_layer.size() != layers.size()) {
    throw ArgumentError("per-layer ratio list does not match layer count");
  }
  CycleTable table;
  table.policy = settings.policy;
  std::uint64_t sum_n = 0;
  std::uint64_t sum_q = 0;
  std::uint64_t sum_pulses = 0;

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerSpec& layer = layers[l];
    if (layer.output_positions < 1) {
      throw ArgumentError("layer output positions must be >= 1");
    }
    Rational ratio = settings.q_over_n;
    if (!settings.per_layer.empty() && settings.per_layer[l].has_value()) {
      ratio = *settings.per_layer[l];
    }

    std::vector<std::int64_t> codes;
    std::int64_t q = 0;
    if (layer.tensor.mode() == TensorMode::real) {
      PvqVector v = pvq_quantize_tensor(layer.tensor, ratio);
      q = v.q;
      codes = std::move(v.codes);
    } else {
      auto ints = layer.tensor.ints();
      codes.assign(ints.begin(), ints.end());
      for (std::int64_t c : codes) q += std::llabs(c);
    }

    CycleRow row;
    row.label = l < labels.size() ? labels[l] : std::to_string(l);
    row.n = codes.size();
    row.q = q;
    row.output_positions = layer.output_positions;
    std::uint32_t nb = 1;
    for (std::int64_t c : codes) {
      if (c != 0) ++row.nz;
      const int pulses = pulse_count(c);
      row.ns_pulses += pulses;
      if (pulses > 0) {
        nb = std::max(nb, static_cast<std::uint32_t>(naf_encode(c).size()));
      }
    }
    row.ns_cycles = row.ns_pulses;
    if (settings.policy == CyclePolicy::shift_counted) row.ns_cycles += nb - 1;

    sum_n += row.n;
    sum_q += static_cast<std::uint64_t>(row.q);
    sum_pulses += row.ns_pulses;
    table.total_mac += mul_positions(row.n, row.output_positions);
    table.total_zero_skip += mul_positions(row.nz, row.output_positions);
    table.total_accumulator +=
        mul_positions(static_cast<std::uint64_t>(row.q), row.output_positions);
    table.total_blmac += mul_positions(row.ns_cycles, row.output_positions);
    table.rows.push_back(std::move(row));
  }

  if (sum_n > 0) {
    table.adds_per_weight_accumulator =
        static_cast<double>(sum_q) / static_cast<double>(sum_n);
    table.pulses_per_weight_blmac =
        static_cast<double>(sum_pulses) / static_cast<double>(sum_n);
  }
  if (table.total_mac > 0) {
    table.weighted_adds_per_weight = static_cast<double>(table.total_accumulator) /
                                     static_cast<double>(table.total_mac);
    table.weighted_pulses_per_weight = static_cast<double>(table.total_blmac) /
                                       static_cast<double>(table.total_mac);
  }
  return table;
}

std::vector<double> fir_frequency_response(std::span<const double> taps,
                                           double sample_rate_hz,
                                           std::size_t grid_points) {
  if (taps.empty()) throw ArgumentError("frequency response needs at least one tap");
  if (grid_points < 2) throw ArgumentError("frequency grid needs at least two points");
  if (!(sample_rate_hz > 0.0)) throw ArgumentError("sample rate must be positive");
  std::vector<double> db(grid_points);
  const double nyquist = sample_rate_hz / 2.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double f = nyquist * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    const double omega = 2.0 * std::numbers::pi * f / sample_rate_hz;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) {
      re += taps[k] * std::cos(omega * static_cast<double>(k));
      im -= taps[k] * std::sin(omega * static_cast<double>(k));
    }
    const double magnitude = std::hypot(re, im);
    db[i] = magnitude > 0.0 ? std::max(-160.0, 20.0 * std::log10(magnitude)) : -160.0;
  }
  return db;
}

FirReport fir_compare(const WeightTensor& taps, std::int64_t q,
                      double sample_rate_hz, std::size_t grid_points) {
  if (taps.size() == 0) throw ArgumentError("fir_compare needs at least one tap");
  if (q < 1) throw ArgumentError("fir_compare needs q >= 1");

  const std::vector<double> real_taps = taps.to_real_values();
  std::vector<std::int64_t> int_taps;
  if (taps.mode() == TensorMode::integer) {
    auto ints = taps.ints();
    int_taps.assign(ints.begin(), ints.end());
  } else {
    double peak = 0.0;
    for (double t : real_taps) peak = std::max(peak, std::fabs(t));
    if (peak == 0.0) throw ArgumentError("all-zero taps cannot be scaled to integers");
    const double scale = 32767.0 / peak;
    int_taps.resize(real_taps.size());
    for (std::size_t k = 0; k < real_taps.size(); ++k) {
      int_taps[k] = static_cast<std::int64_t>(std::nearbyint(real_taps[k] * scale));
    }
  }

  FirReport report;
  report.taps = real_taps.size();
  report.q = q;
  report.mac = {real_taps.size(), real_taps.size()};
  std::uint64_t tap_pulses = 0;
  for (std::int64_t t : int_taps) tap_pulses += pulse_count(t);
  report.blmac = {tap_pulses, 0};

  const PvqVector quantized = pvq_quantize(real_taps, q);
  report.rho = quantized.rho;
  report.pvq = {static_cast<std::uint64_t>(q), 1};
  std::uint64_t code_pulses = 0;
  for (std::int64_t c : quantized.codes) code_pulses += pulse_count(c);
  report.pvq_blmac = {code_pulses, 1};

  const double nyquist = sample_rate_hz / 2.0;
  report.freq_hz.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    report.freq_hz[i] = nyquist * static_cast<double>(i) / static_cast<double>(grid_points - 1);
  }
  report.orig_db = fir_frequency_response(real_taps, sample_rate_hz, grid_points);
  report.pvq_db =
      fir_frequency_response(pvq_reconstruct(quantized), sample_rate_hz, grid_points);
  return report;
}

std::vector<double> design_bandpass(std::size_t taps, double low_hz, double high_hz,
                                    double sample_rate_hz) {
  if (taps < 3) throw ArgumentError("bandpass design needs at least 3 taps");
  if (taps % 2 == 0) throw ArgumentError("bandpass design needs an odd tap count");
  if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < sample_rate_hz / 2.0)) {
    throw ArgumentError("band edges must satisfy 0 < low < high < fs/2");
  }
  const double w1 = 2.0 * std::numbers::pi * low_hz / sample_rate_hz;
  const double w2 = 2.0 * std::numbers::pi * high_hz / sample_rate_hz;
  const std::size_t mid = (taps - 1) / 2;
  std::vector<double> h(taps);
  // Compute one half and mirror it so symmetry is exact, not just nominal.
  for (std::size_t n = 0; n <= mid; ++n) {
    const double k = static_cast<double>(mid - n);
    double ideal;
    if (n == mid) {
      ideal = (w2 - w1) / std::numbers::pi;
    } else {
      ideal = (std::sin(w2 * k) - std::sin(w1 * k)) / (std::numbers::pi * k);
    }
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                               static_cast<double>(taps - 1));
    h[n] = ideal * window;
    h[taps - 1 - n] = h[n];
  }
  return h;
}

// ---------------------------------------------------------------------------
// Rendering.

std::string pulse_stats_csv(std::uint32_t nb_max) {
  if (nb_max < 1 || nb_max > 24) throw ArgumentError("nb_max must be in 1..24");
  std::ostringstream os;
  os << "nb,avg,avg_2dp,max\n";
  for (std::uint32_t nb = 1; nb <= nb_max; ++nb) {
    const PulseStats stats = pulse_stats(nb);
    os << nb << ',' << fmt("%.6f", stats.avg) << ',' << pulse_avg_2dp(stats) << ','
       << stats.max << '\n';
  }
  return os.str();
}

std::string histogram_csv(const HistogramReport& report) {
  std::ostringstream os;
  os << "total";
  for (const char* name : kHistogramBandNames) os << ",pct_" << name;
  os << '\n' << report.total;
  for (double pct : report.band_pct) os << ',' << fmt("%.4f", pct);
  os << '\n';
  return os.str();
}

std::string histogram_text(const HistogramReport& report) {
  std::ostringstream os;
  os << "band        %\n";
  for (std::size_t b = 0; b < report.band_pct.size(); ++b) {
    os << fmt("%-8s %8.4f\n", kHistogramBandNames[b], report.band_pct[b]);
  }
  os << fmt("%-8s %8llu\n", "total", static_cast<unsigned long long>(report.total));
  return os.str();
}

std::string compression_csv(const CompressionReport& report) {
  std::ostringstream os;
  os << "mode,weights,tokens,estimate_bits,payload_bits,container_bits,"
        "estimate_bits_per_weight,payload_bits_per_weight\n";
  for (const CompressionRow* row : {&report.weight_level, &report.bit_layer}) {
    os << mode_name(row->mode) << ',' << report.n << ',' << row->token_count << ','
       << fmt("%.2f", row->estimate_bits) << ',' << row->payload_bits << ','
       << row->container_bits << ',' << fmt("%.4f", row->estimate_bits_per_weight)
       << ',' << fmt("%.4f", row->payload_bits_per_weight) << '\n';
  }
  return os.str();
}

std::string cycles_csv(const CycleTable& table) {
  std::ostringstream os;
  os << "layer,n,q,nz,ns_pulses,ns_cycles,positions\n";
  std::uint64_t sum_n = 0;
  std::uint64_t sum_q = 0;
  std::uint64_t sum_nz = 0;
  std::uint64_t sum_pulses = 0;
  std::uint64_t sum_cycles = 0;
  for (const CycleRow& row : table.rows) {
    os << row.label << ',' << row.n << ',' << row.q << ',' << row.nz << ','
       << row.ns_pulses << ',' << row.ns_cycles << ',' << row.output_positions << '\n';
    sum_n += row.n;
    sum_q += static_cast<std::uint64_t>(row.q);
    sum_nz += row.nz;
    sum_pulses += row.ns_pulses;
    sum_cycles += row.ns_cycles;
  }
  os << "TOTAL," << sum_n << ',' << sum_q << ',' << sum_nz << ',' << sum_pulses << ','
     << sum_cycles << ",\n";
  os << "TOTAL_WEIGHTED," << table.total_mac << ',' << table.total_accumulator << ','
     << table.total_zero_skip << ",," << table.total_blmac << ",\n";
  os << fmt("# adds_per_weight_accumulator=%.6f pulses_per_weight_blmac=%.6f",
            table.adds_per_weight_accumulator, table.pulses_per_weight_blmac)
     << fmt(" weighted_adds_per_weight=%.6f weighted_pulses_per_weight=%.6f\n",
            table.weighted_adds_per_weight, table.weighted_pulses_per_weight);
  return os.str();
}

std::string cycles_text(const CycleTable& table) {
  std::ostringstream os;
  os << fmt("%-8s %12s %12s %12s %12s %12s %10s\n", "layer", "N", "Q", "NZ", "pulses",
            "cycles", "positions");
  for (const CycleRow& row : table.rows) {
    os << fmt("%-8s %12llu %12lld %12llu %12llu %12llu %10llu\n", row.label.c_str(),
              static_cast<unsigned long long>(row.n), static_cast<long long>(row.q),
              static_cast<unsigned long long>(row.nz),
              static_cast<unsigned long long>(row.ns_pulses),
              static_cast<unsigned long long>(row.ns_cycles),
              static_cast<unsigned long long>(row.output_positions));
  }
  os << fmt("weighted totals: mac=%llu zero_skip=%llu accumulator=%llu bit_layer=%llu\n",
            static_cast<unsigned long long>(table.total_mac),
            static_cast<unsigned long long>(table.total_zero_skip),
            static_cast<unsigned long long>(table.total_accumulator),
            static_cast<unsigned long long>(table.total_blmac));
  os << fmt("adds/weight=%.4f pulses/weight=%.4f (weighted %.4f / %.4f)\n",
            table.adds_per_weight_accumulator, table.pulses_per_weight_blmac,
            table.weighted_adds_per_weight, table.weighted_pulses_per_weight);
  return os.str();
}

std::string fir_ops_csv(const FirReport& report) {
  std::ostringstream os;
  os << "operations,mac,blmac,pvq,pvq_blmac\n";
  os << "additions," << report.mac.additions << ',' << report.blmac.additions << ','
     << report.pvq.additions << ',' << report.pvq_blmac.additions << '\n';
  os << "multiplications," << report.mac.multiplications << ','
     << report.blmac.multiplications << ',' << report.pvq.multiplications << ','
     << report.pvq_blmac.multiplications << '\n';
  return os.str();
}

std::string fir_ops_text(const FirReport& report) {
  std::ostringstream os;
  os << fmt("%-16s %10s %10s %10s %10s\n", "operations", "MAC", "BLMAC", "PVQ",
            "PVQ+BLMAC");
  os << fmt("%-16s %10llu %10llu %10llu %10llu\n", "additions",
            static_cast<unsigned long long>(report.mac.additions),
            static_cast<unsigned long long>(report.blmac.additions),
            static_cast<unsigned long long>(report.pvq.additions),
            static_cast<unsigned long long>(report.pvq_blmac.additions));
  os << fmt("%-16s %10llu %10llu %10llu %10llu\n", "multiplications",
            static_cast<unsigned long long>(report.mac.multiplications),
            static_cast<unsigned long long>(report.blmac.multiplications),
            static_cast<unsigned long long>(report.pvq.multiplications),
            static_cast<unsigned long long>(report.pvq_blmac.multiplications));
  return os.str();
}

std::string response_csv(std::span<const double> freq_hz, std::span<const double> db) {
  if (freq_hz.size() != db.size()) {
    throw ArgumentError("frequency and magnitude arrays differ in length");
  }
  std::ostringstream os;
  os << "freq_hz,magnitude_db\n";
  for (std::size_t i = 0; i < freq_hz.size(); ++i) {
    os << fmt("%.6f", freq_hz[i]) << ',' << fmt("%.4f", db[i]) << '\n';
  }
  return os.str();
}

}  // namespace pvqmac
