// Copyright 2026 The gauss-certify Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace gausscert {

inline constexpr int kExitInput = 1;
inline constexpr int kExitCapacity = 2;
inline constexpr int kExitIo = 3;

/// Malformed or invariant-violating user input (exit code 1).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request that exceeds a documented size guard (exit code 2).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File system failures (exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix that should be positive (semi)definite is not, beyond tolerance.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gausscert
