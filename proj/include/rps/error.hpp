// Copyright 2026 The rps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rps {

enum class ErrorKind {
  kParameter,     // invalid numeric parameter (m, q, scale, tolerance, ...)
  kShape,         // dimension mismatch
  kValidation,    // malformed input (asymmetric matrix, bad config, ...)
  kConditioning,  // singular or badly conditioned matrix
  kNotPsd,        // matrix has a clearly negative eigenvalue
  kDegreesOfFreedom,
  kIo,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type thrown by the library; the kind drives the C API
/// error code and the CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace rps
