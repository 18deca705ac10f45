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

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gausscert {

// Full materialization of all partitions is refused above this many modes.
inline constexpr int kMaxEnumerationModes = 14;
inline constexpr int kMaxBellModes = 20;

/// A set partition of N modes, stored as its canonical restricted growth
/// string: rgs[j] is the 0-based block index of mode j, blocks numbered in
/// order of their smallest member.
class Partition {
 public:
  /// Validates the restricted-growth invariant.
  static Partition from_rgs(std::vector<int> rgs);

  /// Accepts any block labelling (e.g. {7,3,7}) and renumbers it canonically.
  static Partition from_labels(std::span<const int> labels);

  static Partition trivial(int n);
  static Partition full_split(int n);

  int size() const { return static_cast<int>(rgs_.size()); }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::vector<int>& rgs() const { return rgs_; }
  /// 0-based members, ascending within a block, blocks ordered by smallest member.
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }

  /// 1-based colon/comma notation, e.g. "1,10:2,3,4".
  std::string to_string() const;
  /// Brace notation, e.g. "{1,10}:{2,3,4}".
  std::string to_braced() const;
  /// Compact key, e.g. "0.1.0.1".
  std::string rgs_key() const;

  friend bool operator==(const Partition& a, const Partition& b) { return a.rgs_ == b.rgs_; }
  friend std::strong_ordering operator<=>(const Partition& a, const Partition& b) { return a.rgs_ <=> b.rgs_; }

 private:
  explicit Partition(std::vector<int> rgs);

  std::vector<int> rgs_;
  std::vector<std::vector<int>> blocks_;
};

/// Bell number B(n) from the Bell triangle, 1 <= n <= 20.
std::uint64_t bell_number(int n);

/// Stirling number of the second kind S(n, k).
std::uint64_t stirling2(int n, int k);

/// Streams partitions of n elements in lexicographic RGS order, optionally
/// only those with exactly `blocks` blocks. No size guard: callers that
/// stream n > kMaxEnumerationModes take responsibility for the runtime.
class PartitionEnumerator {
 public:
  explicit PartitionEnumerator(int n, std::optional<int> blocks = std::nullopt);

  /// Writes the next RGS into `out`; false when exhausted.
  bool next(std::vector<int>& out);
  std::optional<Partition> next();

 private:
  bool advance();

  int n_;
  int k_;  // 0 when unfiltered
  std::vector<int> rgs_;
  std::vector<int> prefix_max_;
  bool started_ = false;
  bool done_ = false;
};

/// Every partition of n, optionally filtered by block count. Throws
/// CapacityError above kMaxEnumerationModes.
std::vector<Partition> enumerate_partitions(int n, std::optional<int> blocks = std::nullopt);

/// Parses "1,10:2,3" style notation (1-based) into a canonical partition of n.
Partition parse_partition(std::string_view text, int n);

/// True iff every block of `fine` lies inside a block of `coarse`.
bool is_refinement(const Partition& fine, const Partition& coarse);

}  // namespace gausscert
