// Copyright 2026 The CLP Authors
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

#ifndef CLP_ERROR_HPP_
#define CLP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace clp {

// Broad failure classes. The C API and the CLI map these onto status and exit
// codes, so the set is deliberately coarse.
enum class ErrorCode {
  kInvalidArgument,  // caller passed something malformed (usage error)
  kData,             // input data violates a format or domain invariant
  kNumerical,        // divergence, singular solve, NaN loss
  kIo,               // filesystem failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorCode::kInvalidArgument, message);
}

}  // namespace clp

#endif  // CLP_ERROR_HPP_
