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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pvqmac/analysis.hpp"
#include "pvqmac/error.hpp"

using namespace pvqmac;

TEST_CASE("histogram bands split magnitudes as documented") {
  const std::vector<std::int64_t> codes = {0, 1, -1, 2};
  const HistogramReport report = weight_histogram(codes);
  CHECK(report.band_pct[0] == doctest::Approx(25.0));
  CHECK(report.band_pct[1] == doctest::Approx(50.0));
  CHECK(report.band_pct[2] == doctest::Approx(25.0));
  double sum = 0.0;
  for (double pct : report.band_pct) sum += pct;
  CHECK(sum == doctest::Approx(100.0).epsilon(1e-4));

  const HistogramReport zeros = weight_histogram(std::vector<std::int64_t>(9, 0));
  CHECK(zeros.band_pct[0] == doctest::Approx(100.0));
}

TEST_CASE("quantized Laplacian weights crowd the small bands") {
  // An independent counting pass backs the histogram percentages.
  const WeightTensor t = synth_laplacian(4608, 1.0, 2);
  const PvqVector v = pvq_quantize(t.reals(), Rational{3, 2}.scale_round(4608));
  const HistogramReport report = weight_histogram(v.codes);

  std::uint64_t small = 0;
  for (std::int64_t c : v.codes) {
    if (std::llabs(c) <= 3) ++small;
  }
  const double small_pct = 100.0 * static_cast<double>(small) /
                           static_cast<double>(v.codes.size());
  CHECK(report.band_pct[0] + report.band_pct[1] + report.band_pct[2] ==
        doctest::Approx(small_pct).epsilon(1e-9));
  CHECK(small_pct >= 85.0);
}

TEST_CASE("compression summary keeps both modes honest") {
  const WeightTensor t = synth_laplacian(2048, 1.0, 9);
  const PvqVector v = pvq_quantize(t.reals(), 3072);
  const CompressionReport report = compression_report(v.codes, v.q, v.rho);
  CHECK(report.weight_level.payload_bits >= report.weight_level.estimate_bits);
  CHECK(report.bit_layer.payload_bits >= report.bit_layer.estimate_bits);
  CHECK(report.bit_layer.estimate_bits_per_weight >
        report.weight_level.estimate_bits_per_weight);
  CHECK(report.weight_level.container_bits > report.weight_level.payload_bits);

  const std::string csv = compression_csv(report);
  CHECK(csv.find("weight_level") != std::string::npos);
  CHECK(csv.find("bit_layer") != std::string::npos);
}

TEST_CASE("cycle rows keep the nonzero/pulse/radius ordering") {
  std::vector<LayerSpec> layers;
  std::vector<std::uint32_t> sizes = {432, 1024, 4608};
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    layers.push_back(LayerSpec{synth_laplacian(sizes[l], 1.0, 100 + l), 10 * (l + 1)});
  }
  CycleSettings settings;
  settings.per_layer = {Rational{4, 1}, std::nullopt, std::nullopt};
  const CycleTable table = cycle_comparison(layers, settings);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].q == 1728);
  CHECK(table.rows[2].q == 6912);
  for (const CycleRow& row : table.rows) {
    CHECK(row.nz <= row.ns_pulses);
    CHECK(row.ns_pulses <= static_cast<std::uint64_t>(row.q));
    CHECK(row.ns_cycles >= row.ns_pulses);
  }
  // Weighted totals multiply per-dot-product cycles by output positions.
  std::uint64_t expect_mac = 0;
  for (const CycleRow& row : table.rows) expect_mac += row.n * row.output_positions;
  CHECK(table.total_mac == expect_mac);
  CHECK(table.pulses_per_weight_blmac < table.adds_per_weight_accumulator);

  const std::string csv = cycles_csv(table);
  CHECK(csv.find("TOTAL,") != std::string::npos);
  CHECK(cycles_text(table).find("adds/weight") != std::string::npos);
}

TEST_CASE("integer layers are taken as codes without requantization") {
  std::vector<LayerSpec> layers;
  layers.push_back(LayerSpec{WeightTensor::integer({4}, {2, 0, -1, 3}), 7});
  const CycleTable table = cycle_comparison(layers, CycleSettings{});
  CHECK(table.rows[0].q == 6);
  CHECK(table.rows[0].nz == 3);
  CHECK(table.total_mac == 4 * 7);
}

TEST_CASE("single tap is allpass, the two-tap averager nulls at Nyquist") {
  const std::vector<double> one = {1.0};
  for (double db : fir_frequency_response(one, 2000.0, 8)) {
    CHECK(db == doctest::Approx(0.0).epsilon(1e-12));
  }
  const std::vector<double> avg = {0.5, 0.5};
  const std::vector<double> db = fir_frequency_response(avg, 2000.0, 3);
  CHECK(db[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(db[2] == doctest::Approx(-160.0));  // clamped floor at the null
}

TEST_CASE("bandpass design is symmetric and meets its ripple and stopbands") {
  const std::vector<double> taps = design_bandpass(197, 220.0, 400.0, 2000.0);
  REQUIRE(taps.size() == 197);
  for (std::size_t k = 0; k < taps.size(); ++k) {
    CHECK(taps[k] == taps[taps.size() - 1 - k]);
  }
  const std::size_t grid = 2001;
  const std::vector<double> db = fir_frequency_response(taps, 2000.0, grid);
  auto freq_of = [&](std::size_t i) {
    return 1000.0 * static_cast<double>(i) / static_cast<double>(grid - 1);
  };
  for (std::size_t i = 0; i < grid; ++i) {
    const double f = freq_of(i);
    if (f >= 240.0 && f <= 380.0) {
      CHECK(std::fabs(db[i]) < 1.0);  // passband ripple, inside the transition
    }
    if (f <= 120.0 || f >= 500.0) {
      CHECK(db[i] < -50.0);  // stopband beyond the 100 Hz margins
    }
  }
}

TEST_CASE("bandpass design rejects degenerate requests") {
  CHECK_THROWS_AS(design_bandpass(1, 220.0, 400.0, 2000.0), ArgumentError);
  CHECK_THROWS_AS(design_bandpass(196, 220.0, 400.0, 2000.0), ArgumentError);
  CHECK_THROWS_AS(design_bandpass(197, 400.0, 220.0, 2000.0), ArgumentError);
  CHECK_THROWS_AS(design_bandpass(197, 220.0, 1100.0, 2000.0), ArgumentError);
}

TEST_CASE("quantized taps track the original response in the passband") {
  const std::vector<double> taps = design_bandpass(197, 220.0, 400.0, 2000.0);
  const WeightTensor tensor =
      WeightTensor::real({static_cast<std::uint32_t>(taps.size())}, taps);
  const FirReport report = fir_compare(tensor, 5 * 197, 2000.0, 1001);
  for (std::size_t i = 0; i < report.freq_hz.size(); ++i) {
    const double f = report.freq_hz[i];
    if (f >= 240.0 && f <= 380.0) {
      CHECK(std::fabs(report.pvq_db[i] - report.orig_db[i]) < 3.0);
    }
  }
}

TEST_CASE("engine op columns are structural where they can be") {
  const std::vector<double> taps = design_bandpass(197, 220.0, 400.0, 2000.0);
  const WeightTensor tensor =
      WeightTensor::real({static_cast<std::uint32_t>(taps.size())}, taps);
  const FirReport report = fir_compare(tensor, 999, 2000.0, 64);
  CHECK(report.mac.additions == 197);
  CHECK(report.mac.multiplications == 197);
  CHECK(report.pvq.additions == 999);
  CHECK(report.pvq.multiplications == 1);
  CHECK(report.blmac.multiplications == 0);
  CHECK(report.pvq_blmac.multiplications == 1);
  CHECK(report.pvq_blmac.additions <= 999);  // pulse budget

  // The bit-layer additions column equals the independent pulse counter run
  // over the 16-bit scaled taps.
  double peak = 0.0;
  for (double t : taps) peak = std::max(peak, std::fabs(t));
  std::uint64_t pulses = 0;
  for (double t : taps) {
    pulses += pulse_count(static_cast<std::int64_t>(std::nearbyint(t * 32767.0 / peak)));
  }
  CHECK(report.blmac.additions == pulses);

  const std::string csv = fir_ops_csv(report);
  CHECK(csv.find("additions,197,") != std::string::npos);
  CHECK(fir_ops_text(report).find("PVQ+BLMAC") != std::string::npos);
}

TEST_CASE("all-one-pulse taps cost one bit-layer add each") {
  std::vector<std::int64_t> pm(32);
  for (std::size_t k = 0; k < pm.size(); ++k) pm[k] = (k % 2 == 0) ? 1 : -1;
  const WeightTensor tensor = WeightTensor::integer({32}, std::move(pm));
  const FirReport report = fir_compare(tensor, 8, 2000.0, 16);
  CHECK(report.blmac.additions == 32);
}

TEST_CASE("symmetric taps have linear phase: two magnitude routes agree") {
  const std::vector<double> taps = design_bandpass(99, 150.0, 300.0, 1000.0);
  const std::size_t mid = 49;
  const std::size_t grid = 257;
  const std::vector<double> db = fir_frequency_response(taps, 1000.0, grid);
  double worst = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double f = 500.0 * static_cast<double>(i) / static_cast<double>(grid - 1);
    const double omega = 2.0 * std::numbers::pi * f / 1000.0;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) {
      re += taps[k] * std::cos(omega * static_cast<double>(k));
      im -= taps[k] * std::sin(omega * static_cast<double>(k));
    }
    const double direct = std::hypot(re, im);
    double amplitude = taps[mid];
    for (std::size_t k = 1; k <= mid; ++k) {
      amplitude += 2.0 * taps[mid - k] * std::cos(omega * static_cast<double>(k));
    }
    peak = std::max(peak, direct);
    worst = std::max(worst, std::fabs(std::fabs(amplitude) - direct));
  }
  CHECK(worst <= 1e-9 * peak);
}

TEST_CASE("pulse statistics CSV carries the documented columns") {
  const std::string csv = pulse_stats_csv(8);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "nb,avg,avg_2dp,max");
  int rows = 0;
  std::string row7;
  while (std::getline(is, line)) {
    ++rows;
    if (line.rfind("7,", 0) == 0) row7 = line;
  }
  CHECK(rows == 8);
  CHECK(row7.find(",2.77,") != std::string::npos);
  CHECK(row7.back() == '4');
}
