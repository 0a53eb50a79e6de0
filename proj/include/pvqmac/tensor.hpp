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

#ifndef PVQMAC_TENSOR_HPP_
#define PVQMAC_TENSOR_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pvqmac {

enum class TensorMode { real, integer };
enum class TensorFormat { text, binary };

// A shaped, flat, row-major weight (or activation) array. Real tensors hold
// values at 32-bit float precision when serialized; integer tensors hold
// exact integers in both formats.
class WeightTensor {
 public:
  WeightTensor() = default;

  static WeightTensor real(std::vector<std::uint32_t> shape,
                           std::vector<double> values);
  static WeightTensor integer(std::vector<std::uint32_t> shape,
                              std::vector<std::int64_t> values);

  TensorMode mode() const { return mode_; }
  const std::vector<std::uint32_t>& shape() const { return shape_; }
  std::size_t size() const;

  // Mode-checked accessors; using the wrong one throws ArgumentError.
  std::span<const double> reals() const;
  std::span<const std::int64_t> ints() const;

  // Values as doubles regardless of mode (integers widen exactly).
  std::vector<double> to_real_values() const;

  bool operator==(const WeightTensor& other) const = default;

 private:
  TensorMode mode_ = TensorMode::real;
  std::vector<std::uint32_t> shape_;
  std::vector<double> real_values_;
  std::vector<std::int64_t> int_values_;
};

// One convolution layer worth of weights plus the number of spatial positions
// its kernel is applied to (used to weight per-dot-product cycle totals).
struct LayerSpec {
  WeightTensor tensor;
  std::uint64_t output_positions = 1;
};

// Text format: first line "# shape d0 d1 ... dk", then whitespace-separated
// decimal values, row-major. A file whose values all parse as plain integers
// loads in integer mode; real-mode writers always emit a decimal marker so
// the mode survives a round-trip.
//
// Binary format: magic "PVQW", 1 mode byte (0 = real32, 1 = int32), 1 rank
// byte, rank little-endian uint32 dims, then the values as little-endian
// float32 or int32.
WeightTensor load_tensor(const std::filesystem::path& path, TensorFormat format);
void save_tensor(const WeightTensor& tensor, const std::filesystem::path& path,
                 TensorFormat format);

// Peeks at the leading bytes: "PVQW" means binary, anything else text.
TensorFormat detect_format(const std::filesystem::path& path);

// Deterministic i.i.d. Laplacian(0, scale) draws via the inverse CDF over a
// splitmix64 stream (documented in the README). Same seed, same bits.
WeightTensor synth_laplacian(std::size_t count, double scale, std::uint64_t seed);

// The raw 64-bit generator behind synth_laplacian, exposed so other modules
// can derive reproducible streams.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace pvqmac

#endif  // PVQMAC_TENSOR_HPP_
