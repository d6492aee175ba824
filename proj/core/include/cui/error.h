/*
 * Copyright 2026 The cui Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CUI_ERROR_H_
#define CUI_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cui {

enum class ErrorCode {
  kInvalidInput,
  kEmptyCalibration,
  kEmptyInput,
  kNumericalError,
  kInvalidConfig,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for the library. Callers that need to distinguish
// failure classes switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "InvalidInput";
    case ErrorCode::kEmptyCalibration:
      return "EmptyCalibration";
    case ErrorCode::kEmptyInput:
      return "EmptyInput";
    case ErrorCode::kNumericalError:
      return "NumericalError";
    case ErrorCode::kInvalidConfig:
      return "InvalidConfig";
    case ErrorCode::kIoError:
      return "IoError";
  }
  return "Unknown";
}

}  // namespace cui

#endif  // CUI_ERROR_H_
