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

#include "pvqmac/tensor.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "pvqmac/error.hpp"

namespace pvqmac {

namespace {

constexpr char kBinaryMagic[4] = {'P', 'V', 'Q', 'W'};
constexpr std::size_t kMaxElements = std::size_t{1} << 31;

std::size_t checked_element_count(const std::vector<std::uint32_t>& shape) {
  if (shape.empty()) throw ArgumentError("tensor shape must have at least one dimension");
  std::size_t n = 1;
  for (std::uint32_t d : shape) {
    if (d == 0) throw ArgumentError("tensor dimensions must be positive");
    if (n > kMaxElements / d) throw DataError("tensor too large");
    n *= d;
  }
  return n;
}

bool looks_integer(std::string_view tok) {
  std::size_t i = (tok[0] == '-' || tok[0] == '+') ? 1 : 0;
  if (i == tok.size()) return false;
  for (; i < tok.size(); ++i) {
    if (tok[i] < '0' || tok[i] > '9') return false;
  }
  return true;
}

// Shortest float32 text that round-trips, with a forced decimal marker so the
// loader can tell real values from integers.
std::string format_real(float v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEnNiI") == std::string::npos) s += ".0";
  return s;
}

struct Token {
  std::string_view text;
  std::size_t line;
  std::size_t column;
};

void tokenize(std::string_view body, std::size_t first_line, std::vector<Token>& out) {
  std::size_t line = first_line;
  std::size_t col = 1;
  std::size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col;
      ++i;
      continue;
    }
    std::size_t start = i;
    std::size_t start_col = col;
    while (i < body.size() && body[i] != ' ' && body[i] != '\t' &&
           body[i] != '\r' && body[i] != '\n') {
      ++i;
      ++col;
    }
    out.push_back(Token{body.substr(start, i - start), line, start_col});
  }
}

[[noreturn]] void fail_at(const std::filesystem::path& path, const Token& tok,
                          const std::string& what) {
  std::ostringstream os;
  os << path.string() << ":" << tok.line << ":" << tok.column << ": " << what
     << " '" << std::string(tok.text) << "'";
  throw DataError(os.str());
}

WeightTensor load_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string content = buf.str();

  std::size_t eol = content.find('\n');
  std::string header = content.substr(0, eol == std::string::npos ? content.size() : eol);
  if (!header.empty() && header.back() == '\r') header.pop_back();

  std::istringstream hs(header);
  std::string hash, word;
  hs >> hash >> word;
  if (hash != "#" || word != "shape") {
    throw DataError(path.string() + ":1:1: expected header '# shape d0 d1 ...', got '" +
                    header + "'");
  }
  std::vector<std::uint32_t> shape;
  long long dim = 0;
  while (hs >> dim) {
    if (dim <= 0 || dim > std::numeric_limits<std::uint32_t>::max()) {
      throw DataError(path.string() + ":1: dimension out of range in shape header");
    }
    shape.push_back(static_cast<std::uint32_t>(dim));
  }
  if (!hs.eof()) throw DataError(path.string() + ":1: non-numeric dimension in shape header");
  const std::size_t expected = checked_element_count(shape);

  std::vector<Token> tokens;
  std::string_view body;
  if (eol != std::string::npos) body = std::string_view(content).substr(eol + 1);
  tokenize(body, 2, tokens);

  if (tokens.size() != expected) {
    std::ostringstream os;
    os << path.string() << ": shape declares " << expected << " values but file has "
       << tokens.size();
    throw DataError(os.str());
  }

  bool all_integers = true;
  for (const Token& t : tokens) {
    if (!looks_integer(t.text)) {
      all_integers = false;
      break;
    }
  }

  if (all_integers) {
    std::vector<std::int64_t> values;
    values.reserve(expected);
    for (const Token& t : tokens) {
      std::int64_t v = 0;
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (res.ec == std::errc::result_out_of_range) fail_at(path, t, "integer out of range");
      if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size()) {
        fail_at(path, t, "expected numeric value, got");
      }
      values.push_back(v);
    }
    return WeightTensor::integer(std::move(shape), std::move(values));
  }

  std::vector<double> values;
  values.reserve(expected);
  for (const Token& t : tokens) {
    float v = 0.0f;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size()) {
      fail_at(path, t, "expected numeric value, got");
    }
    values.push_back(static_cast<double>(v));
  }
  return WeightTensor::real(std::move(shape), std::move(values));
}

void save_text(const WeightTensor& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "# shape";
  for (std::uint32_t d : t.shape()) out << ' ' << d;
  out << '\n';
  const std::size_t per_line = 16;
  if (t.mode() == TensorMode::integer) {
    auto v = t.ints();
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << v[i] << (((i + 1) % per_line == 0 || i + 1 == v.size()) ? '\n' : ' ');
    }
  } else {
    auto v = t.reals();
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << format_real(static_cast<float>(v[i]))
          << (((i + 1) % per_line == 0 || i + 1 == v.size()) ? '\n' : ' ');
    }
  }
  if (!out) throw DataError("write failure on " + path.string());
}

[[noreturn]] void fail_binary(const std::filesystem::path& path, std::size_t offset,
                              const std::string& what) {
  std::ostringstream os;
  os << path.string() << ": " << what << " at byte offset " << offset;
  throw DataError(os.str());
}

WeightTensor load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto need = [&](std::size_t n, const char* what) {
    if (bytes.size() - pos < n) fail_binary(path, pos, std::string("truncated ") + what);
  };
  need(6, "header");
  if (std::memcmp(bytes.data(), kBinaryMagic, 4) != 0) fail_binary(path, 0, "bad magic");
  pos = 4;
  const unsigned mode_byte = bytes[pos++];
  if (mode_byte > 1) fail_binary(path, pos - 1, "unknown mode byte");
  const unsigned rank = bytes[pos++];
  if (rank == 0) fail_binary(path, pos - 1, "zero rank");

  auto read_u32 = [&]() {
    std::uint32_t v = std::uint32_t(bytes[pos]) | (std::uint32_t(bytes[pos + 1]) << 8) |
                      (std::uint32_t(bytes[pos + 2]) << 16) |
                      (std::uint32_t(bytes[pos + 3]) << 24);
    pos += 4;
    return v;
  };

  need(std::size_t{4} * rank, "shape");
  std::vector<std::uint32_t> shape(rank);
  for (unsigned i = 0; i < rank; ++i) {
    shape[i] = read_u32();
    if (shape[i] == 0) fail_binary(path, pos - 4, "zero dimension");
  }
  const std::size_t count = checked_element_count(shape);
  if (bytes.size() - pos != count * 4) {
    fail_binary(path, pos, "payload size does not match shape");
  }

  if (mode_byte == 1) {
    std::vector<std::int64_t> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      values[i] = static_cast<std::int32_t>(read_u32());
    }
    return WeightTensor::integer(std::move(shape), std::move(values));
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = static_cast<double>(std::bit_cast<float>(read_u32()));
  }
  return WeightTensor::real(std::move(shape), std::move(values));
}

void save_binary(const WeightTensor& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  out.write(kBinaryMagic, 4);
  out.put(t.mode() == TensorMode::integer ? '\x01' : '\x00');
  if (t.shape().size() > 255) throw DataError("binary format limits rank to 255");
  out.put(static_cast<char>(t.shape().size()));
  for (std::uint32_t d : t.shape()) put_u32(d);
  if (t.mode() == TensorMode::integer) {
    for (std::int64_t v : t.ints()) {
      if (v < std::numeric_limits<std::int32_t>::min() ||
          v > std::numeric_limits<std::int32_t>::max()) {
        throw DataError("integer value out of int32 range for binary format");
      }
      put_u32(static_cast<std::uint32_t>(static_cast<std::int32_t>(v)));
    }
  } else {
    for (double v : t.reals()) put_u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  if (!out) throw DataError("write failure on " + path.string());
}

}  // namespace

WeightTensor WeightTensor::real(std::vector<std::uint32_t> shape,
                                std::vector<double> values) {
  const std::size_t n = checked_element_count(shape);
  if (n != values.size()) {
    throw DataError("shape/data length mismatch: shape holds " + std::to_string(n) +
                    " values, data holds " + std::to_string(values.size()));
  }
  WeightTensor t;
  t.mode_ = TensorMode::real;
  t.shape_ = std::move(shape);
  t.real_values_ = std::move(values);
  return t;
}

WeightTensor WeightTensor::integer(std::vector<std::uint32_t> shape,
                                   std::vector<std::int64_t> values) {
  const std::size_t n = checked_element_count(shape);
  if (n != values.size()) {
    throw DataError("shape/data length mismatch: shape holds " + std::to_string(n) +
                    " values, data holds " + std::to_string(values.size()));
  }
  WeightTensor t;
  t.mode_ = TensorMode::integer;
  t.shape_ = std::move(shape);
  t.int_values_ = std::move(values);
  return t;
}

std::size_t WeightTensor::size() const {
  return mode_ == TensorMode::integer ? int_values_.size() : real_values_.size();
}

std::span<const double> WeightTensor::reals() const {
  if (mode_ != TensorMode::real) throw ArgumentError("tensor is not in real mode");
  return real_values_;
}

std::span<const std::int64_t> WeightTensor::ints() const {
  if (mode_ != TensorMode::integer) throw ArgumentError("tensor is not in integer mode");
  return int_values_;
}

std::vector<double> WeightTensor::to_real_values() const {
  if (mode_ == TensorMode::real) return real_values_;
  std::vector<double> out(int_values_.size());
  for (std::size_t i = 0; i < int_values_.size(); ++i) {
    out[i] = static_cast<double>(int_values_[i]);
  }
  return out;
}

WeightTensor load_tensor(const std::filesystem::path& path, TensorFormat format) {
  return format == TensorFormat::text ? load_text(path) : load_binary(path);
}

void save_tensor(const WeightTensor& tensor, const std::filesystem::path& path,
                 TensorFormat format) {
  if (format == TensorFormat::text) {
    save_text(tensor, path);
  } else {
    save_binary(tensor, path);
  }
}

TensorFormat detect_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char head[4] = {0, 0, 0, 0};
  in.read(head, 4);
  return (in.gcount() == 4 && std::memcmp(head, kBinaryMagic, 4) == 0)
             ? TensorFormat::binary
             : TensorFormat::text;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

WeightTensor synth_laplacian(std::size_t count, double scale, std::uint64_t seed) {
  if (count < 1) throw ArgumentError("synth_laplacian: count must be >= 1");
  if (!(scale > 0.0)) throw ArgumentError("synth_laplacian: scale must be positive");
  if (count > kMaxElements) throw ArgumentError("synth_laplacian: count too large");
  std::vector<double> values(count);
  std::uint64_t state = seed;
  for (std::size_t i = 0; i < count; ++i) {
    // u in the open interval (0,1); v in (-1/2, 1/2); inverse Laplacian CDF.
    const double u = (static_cast<double>(splitmix64(state) >> 11) + 0.5) * 0x1.0p-53;
    const double v = u - 0.5;
    values[i] = (v < 0.0) ? scale * std::log1p(2.0 * v) : -scale * std::log1p(-2.0 * v);
  }
  return WeightTensor::real({static_cast<std::uint32_t>(count)}, std::move(values));
}

}  // namespace pvqmac
