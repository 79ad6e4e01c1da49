// Copyright 2026 the acesync authors.
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
// =============================================================================

#ifndef ACESYNC_ERRORS_HPP_
#define ACESYNC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace acesync {

// Invalid configuration values or arguments outside their documented ranges.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched vector lengths or matrix dimensions.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files (trace CSV, metrics CSV, JSON config).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failures (unwritable path, missing file).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Messages referencing unknown devices or blocks.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Solver instance exceeding configured limits.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite numbers are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace acesync

#endif  // ACESYNC_ERRORS_HPP_
