// Copyright 2026 The faceflow Authors
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
#include <vector>

namespace faceflow {

/// Error taxonomy shared by the whole library. The C API maps each class
/// onto a status code, the CLI onto an exit code.
enum class ErrorCode {
  InvalidParameter,
  Shape,
  Range,
  Format,
  Io,
  Optimization,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Non-finite or otherwise unusable numeric input (e.g. scale <= 0).
class InvalidParameterError : public Error {
public:
  explicit InvalidParameterError(const std::string& what)
      : Error(ErrorCode::InvalidParameter, what) {}
};

/// Dimension mismatch between containers that must agree.
class ShapeError : public Error {
public:
  explicit ShapeError(const std::string& what) : Error(ErrorCode::Shape, what) {}
};

/// Scalar argument outside its documented range.
class RangeError : public Error {
public:
  explicit RangeError(const std::string& what) : Error(ErrorCode::Range, what) {}
};

/// Malformed file payload (bad magic, version, truncation, bad JSON).
class FormatError : public Error {
public:
  explicit FormatError(const std::string& what) : Error(ErrorCode::Format, what) {}
};

/// Filesystem-level failure (missing file, unreadable, unwritable).
class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

/// Optimization diverged; carries the loss trace up to the failure.
class OptimizationError : public Error {
public:
  OptimizationError(const std::string& what, std::vector<double> trace)
      : Error(ErrorCode::Optimization, what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

private:
  std::vector<double> trace_;
};

} // namespace faceflow
