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
#include <cstdlib>
#include <filesystem>
#include <vector>

#include "oracles.hpp"
#include "pvqmac/error.hpp"
#include "pvqmac/pvq.hpp"
#include "pvqmac/tensor.hpp"

using namespace pvqmac;

namespace {

double l2_error(std::span<const double> w, const PvqVector& v) {
  double err2 = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double d = w[j] - v.rho * static_cast<double>(v.codes[j]);
    err2 += d * d;
  }
  return std::sqrt(err2);
}

std::int64_t l1_norm(const std::vector<std::int64_t>& codes) {
  std::int64_t sum = 0;
  for (std::int64_t c : codes) sum += std::llabs(c);
  return sum;
}

}  // namespace

TEST_CASE("single-axis vector lands on the pyramid apex") {
  const std::vector<double> w = {1.0, 0.0, 0.0, 0.0};
  const PvqVector v = pvq_quantize(w, 5);
  CHECK(v.codes == std::vector<std::int64_t>{5, 0, 0, 0});
  CHECK(v.rho == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("two-dimensional example agrees with exhaustive enumeration") {
  const std::vector<double> w = {0.7, -0.3};
  const PvqVector v = pvq_quantize(w, 3);
  CHECK(v.codes == std::vector<std::int64_t>{2, -1});
  CHECK(v.rho == doctest::Approx(0.34).epsilon(1e-12));

  const oracle::BestPyramidPoint best = oracle::exhaustive_pvq(w, 3);
  CHECK(best.codes == v.codes);
  CHECK(best.rho == doctest::Approx(v.rho).epsilon(1e-12));
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(pvq_quantize(std::vector<double>{0.0, 0.0}, 2), ArgumentError);
  CHECK_THROWS_AS(pvq_quantize(std::vector<double>{}, 2), ArgumentError);
  CHECK_THROWS_AS(pvq_quantize(std::vector<double>{1.0}, 0), ArgumentError);
}

TEST_CASE("reconstruction scales codes by rho") {
  PvqVector v;
  v.rho = 0.2;
  v.codes = {5, 0, 0, 0};
  v.q = 5;
  CHECK(pvq_reconstruct(v) == std::vector<double>{1.0, 0.0, 0.0, 0.0});

  v.rho = 0.34;
  v.codes = {2, -1};
  v.q = 3;
  const std::vector<double> r = pvq_reconstruct(v);
  CHECK(r[0] == doctest::Approx(0.68).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(-0.34).epsilon(1e-12));

  v.rho = 0.0;
  CHECK(pvq_reconstruct(v) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("tensor quantization derives q from the ratio and element count") {
  // 3x3x3x16 at ratio 4 and 3x3x32x64 at 3/2.
  {
    WeightTensor t = synth_laplacian(432, 1.0, 3);
    const PvqVector v = pvq_quantize_tensor(
        WeightTensor::real({3, 3, 3, 16}, std::vector<double>(
                                              t.reals().begin(), t.reals().end())),
        Rational{4, 1});
    CHECK(v.q == 1728);
    CHECK(l1_norm(v.codes) == 1728);
  }
  {
    WeightTensor t = synth_laplacian(18432, 1.0, 4);
    const PvqVector v = pvq_quantize_tensor(
        WeightTensor::real({3, 3, 32, 64}, std::vector<double>(
                                               t.reals().begin(), t.reals().end())),
        Rational{3, 2});
    CHECK(v.q == 27648);
    CHECK(l1_norm(v.codes) == 27648);
  }
  {
    const PvqVector v =
        pvq_quantize_tensor(WeightTensor::real({1}, {2.5}), Rational{3, 1});
    CHECK(v.codes == std::vector<std::int64_t>{3});
    CHECK(v.rho == doctest::Approx(2.5 / 3.0).epsilon(1e-12));
  }
  CHECK(Rational{3, 2}.scale_round(4608) == 6912);
}

TEST_CASE("ratio parser accepts fractions, decimals and integers") {
  CHECK(Rational::parse("3/2").num == 3);
  CHECK(Rational::parse("3/2").den == 2);
  CHECK(Rational::parse("1.5").value() == doctest::Approx(1.5));
  CHECK(Rational::parse("4").den == 1);
  CHECK_THROWS_AS(Rational::parse("0"), ArgumentError);
  CHECK_THROWS_AS(Rational::parse("-1/2"), ArgumentError);
  CHECK_THROWS_AS(Rational::parse("abc"), ArgumentError);
}

TEST_CASE("codes always sit exactly on the pyramid") {
  std::uint64_t rng = 2024;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(oracle::rng_int(rng, 1, 48));
    const std::int64_t q = oracle::rng_int(rng, 1, 300);
    std::vector<double> w(n);
    bool all_zero = true;
    for (auto& v : w) {
      v = 4.0 * (oracle::rng_unit(rng) - 0.5);
      if (v != 0.0) all_zero = false;
    }
    if (all_zero) w[0] = 1.0;
    const PvqVector v = pvq_quantize(w, q);
    CHECK(l1_norm(v.codes) == q);
    CHECK(v.rho >= 0.0);
  }
}

TEST_CASE("rho is a strict local minimum of the reconstruction error") {
  std::uint64_t rng = 77;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = static_cast<std::size_t>(oracle::rng_int(rng, 2, 24));
    const std::int64_t q = oracle::rng_int(rng, 2, 96);
    std::vector<double> w(n);
    for (auto& v : w) v = oracle::rng_gaussianish(rng);
    if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) w[0] = 0.5;
    const PvqVector v = pvq_quantize(w, q);
    const double base = l2_error(w, v);
    for (double eps : {1e-4, -1e-4}) {
      PvqVector nudged = v;
      nudged.rho += eps;
      CHECK(l2_error(w, nudged) > base);
    }
  }
}

TEST_CASE("a larger pyramid radius buys fidelity on average") {
  const std::size_t n = 64;
  double err_fine = 0.0;
  double err_coarse = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const WeightTensor t = synth_laplacian(n, 1.0, 1000 + trial);
    std::span<const double> w = t.reals();
    double norm = 0.0;
    for (double v : w) norm += v * v;
    norm = std::sqrt(norm);
    err_fine += l2_error(w, pvq_quantize(w, 2 * n)) / norm;
    err_coarse += l2_error(w, pvq_quantize(w, n / 2)) / norm;
  }
  CHECK(err_fine / 100.0 < err_coarse / 100.0);
}

TEST_CASE("greedy projection stays near the exhaustive optimum") {
  std::uint64_t rng = 555;
  int within = 0;
  const int trials = 500;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t n = static_cast<std::size_t>(oracle::rng_int(rng, 1, 4));
    const std::int64_t q = oracle::rng_int(rng, 1, 8);
    std::vector<double> w(n);
    bool all_zero = true;
    for (auto& v : w) {
      v = oracle::rng_gaussianish(rng);
      if (v != 0.0) all_zero = false;
    }
    if (all_zero) w[0] = 0.25;
    const PvqVector greedy = pvq_quantize(w, q);
    const oracle::BestPyramidPoint best = oracle::exhaustive_pvq(w, q);
    const double greedy_err = l2_error(w, greedy);
    const double best_err = std::sqrt(best.err2);
    if (best_err < 1e-12) {
      if (greedy_err < 1e-9) ++within;
    } else if (greedy_err <= 1.05 * best_err) {
      ++within;
    }
  }
  // Design target: at least 95% of trials within 1.05x of optimal.
  CHECK(within >= trials * 95 / 100);
}

TEST_CASE("sidecar round-trips rho, q and n") {
  PvqVector v;
  v.rho = 0.03739281726354;
  v.codes = {1, -2, 3};
  v.q = 6;
  const auto path = std::filesystem::temp_directory_path() / "pvqmac_sidecar.txt";
  save_sidecar(v, path);
  const PvqSidecar sc = load_sidecar(path);
  CHECK(sc.rho == doctest::Approx(v.rho).epsilon(1e-15));
  CHECK(sc.q == 6);
  CHECK(sc.n == 3);
}
