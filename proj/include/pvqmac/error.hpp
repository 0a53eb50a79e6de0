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

#ifndef PVQMAC_ERROR_HPP_
#define PVQMAC_ERROR_HPP_

#include <stdexcept>

namespace pvqmac {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or violated preconditions. The CLI maps these to exit code 1.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed files, malformed streams, or values outside the representable
// range of a format. The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

// A computation would leave the exact 64-bit integer range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

}  // namespace pvqmac

#endif  // PVQMAC_ERROR_HPP_
