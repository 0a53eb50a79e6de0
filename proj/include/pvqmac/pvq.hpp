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

#ifndef PVQMAC_PVQ_HPP_
#define PVQMAC_PVQ_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "pvqmac/tensor.hpp"

namespace pvqmac {

// Exact positive ratio, used for Q/N so the derived Q stays integer-exact.
struct Rational {
  std::int64_t num = 3;
  std::int64_t den = 2;

  // Accepts "3/2", "1.5" and "4".
  static Rational parse(std::string_view text);

  // round(num * n / den), ties rounded up (values are positive).
  std::int64_t scale_round(std::int64_t n) const;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// An integer point on the pyramid sum(|codes_j|) == q together with the real
// scale rho that maps it back onto the vector it approximates.
struct PvqVector {
  double rho = 0.0;
  std::vector<std::int64_t> codes;
  std::int64_t q = 0;

  std::size_t dim() const { return codes.size(); }

  bool operator==(const PvqVector& other) const = default;
};

// Projects w onto the pyramid of radius q: scale by q / sum|w_j|, round each
// component, then repair the L1 sum one unit at a time, always touching the
// component whose rounding residual is most out of line (ties to the lowest
// index). rho is the least-squares fit (w.codes)/(codes.codes), clamped at 0.
//
// All-zero input throws ArgumentError: no pyramid point scales onto it.
PvqVector pvq_quantize(std::span<const double> w, std::int64_t q);

// rho * codes, componentwise.
std::vector<double> pvq_reconstruct(const PvqVector& v);

// Flattens a real tensor row-major into an N-vector and quantizes it with
// Q = round(q_over_n * N).
PvqVector pvq_quantize_tensor(const WeightTensor& tensor, Rational q_over_n);

// Text sidecar carrying the metadata needed to rescale and reshape codes:
// a single line "rho=<decimal> q=<int> n=<int>".
struct PvqSidecar {
  double rho = 0.0;
  std::int64_t q = 0;
  std::uint64_t n = 0;
};

void save_sidecar(const PvqVector& v, const std::filesystem::path& path);
PvqSidecar load_sidecar(const std::filesystem::path& path);

}  // namespace pvqmac

#endif  // PVQMAC_PVQ_HPP_
