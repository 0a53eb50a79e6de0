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

#include "pvqmac/pvq.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <queue>
#include <string>

#include "pvqmac/error.hpp"

namespace pvqmac {

namespace {

struct Candidate {
  double residual;
  std::size_t index;
};

// Largest residual first, ties to the lowest index.
struct MaxFirst {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.residual != b.residual) return a.residual < b.residual;
    return a.index > b.index;
  }
};

// Most negative residual first, ties to the lowest index.
struct MinFirst {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.residual != b.residual) return a.residual > b.residual;
    return a.index > b.index;
  }
};

}  // namespace

Rational Rational::parse(std::string_view text) {
  auto parse_i64 = [&](std::string_view s) -> std::int64_t {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ArgumentError("cannot parse ratio component '" + std::string(s) + "'");
    }
    return v;
  };
  Rational r;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    r.num = parse_i64(text.substr(0, slash));
    r.den = parse_i64(text.substr(slash + 1));
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 9) throw ArgumentError("too many decimals in ratio '" + std::string(text) + "'");
    std::int64_t whole = dot == 0 ? 0 : parse_i64(text.substr(0, dot));
    std::int64_t num_frac = frac.empty() ? 0 : parse_i64(frac);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    r.num = whole * den + num_frac;
    r.den = den;
  } else {
    r.num = parse_i64(text);
    r.den = 1;
  }
  if (r.num <= 0 || r.den <= 0) {
    throw ArgumentError("ratio must be positive: '" + std::string(text) + "'");
  }
  return r;
}

std::int64_t Rational::scale_round(std::int64_t n) const {
  if (n < 0) throw ArgumentError("scale_round expects a non-negative count");
  const __int128 t = static_cast<__int128>(num) * n * 2 + den;
  return static_cast<std::int64_t>(t / (static_cast<__int128>(den) * 2));
}

PvqVector pvq_quantize(std::span<const double> w, std::int64_t q) {
  if (w.empty()) throw ArgumentError("pvq_quantize: input vector is empty");
  if (q < 1) throw ArgumentError("pvq_quantize: q must be >= 1");

  double l1 = 0.0;
  for (double v : w) {
    if (!std::isfinite(v)) throw ArgumentError("pvq_quantize: non-finite input value");
    l1 += std::fabs(v);
  }
  if (l1 == 0.0) {
    throw ArgumentError("pvq_quantize: all-zero vector has no meaningful pyramid image");
  }

  const std::size_t n = w.size();
  const double s = static_cast<double>(q) / l1;
  std::vector<std::int64_t> codes(n);
  std::vector<double> residual(n);
  std::int64_t l1_codes = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double target = s * w[j];
    codes[j] = std::llround(target);
    l1_codes += std::llabs(codes[j]);
    residual[j] = std::fabs(target) - static_cast<double>(std::llabs(codes[j]));
  }

  if (l1_codes < q) {
    std::priority_queue<Candidate, std::vector<Candidate>, MaxFirst> heap;
    for (std::size_t j = 0; j < n; ++j) heap.push({residual[j], j});
    while (l1_codes < q) {
      Candidate top = heap.top();
      heap.pop();
      if (top.residual != residual[top.index]) continue;  // stale entry
      const std::size_t j = top.index;
      codes[j] += (w[j] >= 0.0) ? 1 : -1;
      residual[j] -= 1.0;
      ++l1_codes;
      heap.push({residual[j], j});
    }
  } else if (l1_codes > q) {
    std::priority_queue<Candidate, std::vector<Candidate>, MinFirst> heap;
    for (std::size_t j = 0; j < n; ++j) heap.push({residual[j], j});
    while (l1_codes > q) {
      Candidate top = heap.top();
      heap.pop();
      if (top.residual != residual[top.index]) continue;
      const std::size_t j = top.index;
      codes[j] += (codes[j] > 0) ? -1 : 1;
      residual[j] += 1.0;
      --l1_codes;
      heap.push({residual[j], j});
    }
  }

  double wk = 0.0;
  double kk = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    wk += w[j] * static_cast<double>(codes[j]);
    kk += static_cast<double>(codes[j]) * static_cast<double>(codes[j]);
  }
  PvqVector out;
  out.rho = (kk > 0.0) ? std::max(0.0, wk / kk) : 0.0;
  out.codes = std::move(codes);
  out.q = q;
  return out;
}

std::vector<double> pvq_reconstruct(const PvqVector& v) {
  std::vector<double> out(v.codes.size());
  for (std::size_t j = 0; j < v.codes.size(); ++j) {
    out[j] = v.rho * static_cast<double>(v.codes[j]);
  }
  return out;
}

PvqVector pvq_quantize_tensor(const WeightTensor& tensor, Rational q_over_n) {
  if (tensor.mode() != TensorMode::real) {
    throw ArgumentError("pvq_quantize_tensor expects a real-mode tensor");
  }
  const std::int64_t n = static_cast<std::int64_t>(tensor.size());
  const std::int64_t q = q_over_n.scale_round(n);
  if (q < 1) throw ArgumentError("q_over_n * n rounds to zero; nothing to quantize with");
  return pvq_quantize(tensor.reals(), q);
}

void save_sidecar(const PvqVector& v, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v.rho);
  out << "rho=" << buf << " q=" << v.q << " n=" << v.codes.size() << "\n";
  if (!out) throw DataError("write failure on " + path.string());
}

PvqSidecar load_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  PvqSidecar sc;
  double rho = 0.0;
  long long q = 0;
  unsigned long long n = 0;
  if (std::sscanf(line.c_str(), "rho=%lf q=%lld n=%llu", &rho, &q, &n) != 3) {
    throw DataError(path.string() + ":1: expected 'rho=<decimal> q=<int> n=<int>'");
  }
  sc.rho = rho;
  sc.q = q;
  sc.n = n;
  return sc;
}

}  // namespace pvqmac
