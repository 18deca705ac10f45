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

#include "gausscert/partitions.hpp"

#include <algorithm>
#include <charconv>

#include "gausscert/errors.hpp"

namespace gausscert {

Partition::Partition(std::vector<int> rgs) : rgs_(std::move(rgs)) {
  int k = 0;
  for (int label : rgs_) k = std::max(k, label + 1);
  blocks_.resize(k);
  for (int j = 0; j < size(); ++j) blocks_[rgs_[j]].push_back(j);
}

Partition Partition::from_rgs(std::vector<int> rgs) {
  if (rgs.empty()) throw InputError("partition must cover at least one mode");
  int max_so_far = -1;
  for (std::size_t j = 0; j < rgs.size(); ++j) {
    if (rgs[j] < 0 || rgs[j] > max_so_far + 1) {
      throw InputError("not a restricted growth string at position " + std::to_string(j));
    }
    max_so_far = std::max(max_so_far, rgs[j]);
  }
  return Partition(std::move(rgs));
}

Partition Partition::from_labels(std::span<const int> labels) {
  if (labels.empty()) throw InputError("partition must cover at least one mode");
  std::vector<int> seen;
  std::vector<int> rgs;
  rgs.reserve(labels.size());
  for (int label : labels) {
    auto it = std::find(seen.begin(), seen.end(), label);
    if (it == seen.end()) {
      seen.push_back(label);
      rgs.push_back(static_cast<int>(seen.size()) - 1);
    } else {
      rgs.push_back(static_cast<int>(it - seen.begin()));
    }
  }
  return Partition(std::move(rgs));
}

Partition Partition::trivial(int n) {
  if (n < 1) throw InputError("partition must cover at least one mode");
  return Partition(std::vector<int>(n, 0));
}

Partition Partition::full_split(int n) {
  if (n < 1) throw InputError("partition must cover at least one mode");
  std::vector<int> rgs(n);
  for (int j = 0; j < n; ++j) rgs[j] = j;
  return Partition(std::move(rgs));
}

std::string Partition::to_string() const {
  std::string out;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (b) out += ':';
    for (std::size_t i = 0; i < blocks_[b].size(); ++i) {
      if (i) out += ',';
      out += std::to_string(blocks_[b][i] + 1);
    }
  }
  return out;
}

std::string Partition::to_braced() const {
  std::string out;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (b) out += ':';
    out += '{';
    for (std::size_t i = 0; i < blocks_[b].size(); ++i) {
      if (i) out += ',';
      out += std::to_string(blocks_[b][i] + 1);
    }
    out += '}';
  }
  return out;
}

std::string Partition::rgs_key() const {
  std::string out;
  for (int label : rgs_) {
    out += std::to_string(label);
    out += '.';
  }
  out.pop_back();
  return out;
}

std::uint64_t bell_number(int n) {
  if (n < 1 || n > kMaxBellModes) {
    throw InputError("bell_number: n must be in [1, " + std::to_string(kMaxBellModes) + "], got " + std::to_string(n));
  }
  // Bell triangle: each row starts with the last entry of the previous row.
  std::vector<std::uint64_t> row{1};
  for (int i = 1; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.back();
}

std::uint64_t stirling2(int n, int k) {
  if (n < 0 || k < 0) return 0;
  std::vector<std::vector<std::uint64_t>> s(n + 1, std::vector<std::uint64_t>(std::max(k, n) + 1, 0));
  s[0][0] = 1;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= i; ++j) s[i][j] = j * s[i - 1][j] + s[i - 1][j - 1];
  }
  return k <= n ? s[n][k] : 0;
}

PartitionEnumerator::PartitionEnumerator(int n, std::optional<int> blocks) : n_(n), k_(blocks.value_or(0)) {
  if (n < 1) throw InputError("cannot enumerate partitions of " + std::to_string(n) + " elements");
  if (blocks && (*blocks < 1 || *blocks > n)) {
    throw InputError("block filter " + std::to_string(*blocks) + " outside [1, " + std::to_string(n) + "]");
  }
  rgs_.assign(n_, 0);
  if (k_ > 0) {
    for (int j = n_ - k_ + 1; j < n_; ++j) rgs_[j] = j - (n_ - k_);
  }
  prefix_max_.resize(n_);
  int m = 0;
  for (int j = 0; j < n_; ++j) prefix_max_[j] = m = std::max(m, rgs_[j]);
}

bool PartitionEnumerator::advance() {
  for (int i = n_ - 1; i >= 1; --i) {
    const int m = prefix_max_[i - 1];
    const int candidate = rgs_[i] + 1;
    if (candidate > m + 1) continue;
    if (k_ > 0 && candidate > k_ - 1) continue;
    const int new_max = std::max(m, candidate);
    const int remaining = n_ - 1 - i;
    const int needed = k_ > 0 ? k_ - 1 - new_max : 0;
    if (needed > remaining) continue;
    rgs_[i] = candidate;
    prefix_max_[i] = new_max;
    for (int j = i + 1; j < n_; ++j) {
      const int from_end = n_ - j;  // 1 for the last position
      rgs_[j] = from_end <= needed ? new_max + (needed - from_end + 1) : 0;
      prefix_max_[j] = std::max(prefix_max_[j - 1], rgs_[j]);
    }
    return true;
  }
  return false;
}

bool PartitionEnumerator::next(std::vector<int>& out) {
  if (done_) return false;
  if (started_ && !advance()) {
    done_ = true;
    return false;
  }
  started_ = true;
  out = rgs_;
  return true;
}

std::optional<Partition> PartitionEnumerator::next() {
  std::vector<int> rgs;
  if (!next(rgs)) return std::nullopt;
  return Partition::from_rgs(std::move(rgs));
}

std::vector<Partition> enumerate_partitions(int n, std::optional<int> blocks) {
  if (n > kMaxEnumerationModes) {
    throw CapacityError("refusing to materialize all partitions of " + std::to_string(n) + " modes (limit " +
                        std::to_string(kMaxEnumerationModes) +
                        "); use a block-count filter, an explicit partition list, or stream with PartitionEnumerator");
  }
  PartitionEnumerator it(n, blocks);
  std::vector<Partition> out;
  out.reserve(blocks ? stirling2(n, *blocks) : bell_number(n));
  while (auto p = it.next()) out.push_back(std::move(*p));
  return out;
}

Partition parse_partition(std::string_view text, int n) {
  if (n < 1) throw InputError("partition size must be positive");
  std::vector<int> labels(n, -1);
  int block = 0;
  std::size_t pos = 0;
  while (true) {
    const std::size_t colon = text.find(':', pos);
    const std::string_view block_text = text.substr(pos, colon == std::string_view::npos ? text.npos : colon - pos);
    std::size_t item_pos = 0;
    bool any = false;
    while (true) {
      const std::size_t comma = block_text.find(',', item_pos);
      std::string_view item =
          block_text.substr(item_pos, comma == std::string_view::npos ? block_text.npos : comma - item_pos);
      while (!item.empty() && (item.front() == ' ' || item.front() == '{')) item.remove_prefix(1);
      while (!item.empty() && (item.back() == ' ' || item.back() == '}')) item.remove_suffix(1);
      int mode = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), mode);
      if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
        throw InputError("partition '" + std::string(text) + "': cannot parse mode index '" + std::string(item) + "'");
      }
      if (mode < 1 || mode > n) {
        throw InputError("partition '" + std::string(text) + "': mode index " + std::to_string(mode) +
                         " out of range [1, " + std::to_string(n) + "]");
      }
      if (labels[mode - 1] != -1) {
        throw InputError("partition '" + std::string(text) + "': duplicate index " + std::to_string(mode));
      }
      labels[mode - 1] = block;
      any = true;
      if (comma == std::string_view::npos) break;
      item_pos = comma + 1;
    }
    if (!any) throw InputError("partition '" + std::string(text) + "': empty block");
    ++block;
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  for (int j = 0; j < n; ++j) {
    if (labels[j] == -1) {
      throw InputError("partition '" + std::string(text) + "': missing index " + std::to_string(j + 1));
    }
  }
  return Partition::from_labels(labels);
}

bool is_refinement(const Partition& fine, const Partition& coarse) {
  if (fine.size() != coarse.size()) {
    throw InputError("is_refinement: partitions of " + std::to_string(fine.size()) + " and " +
                     std::to_string(coarse.size()) + " elements");
  }
  for (const auto& block : fine.blocks()) {
    const int target = coarse.rgs()[block.front()];
    for (int member : block) {
      if (coarse.rgs()[member] != target) return false;
    }
  }
  return true;
}

}  // namespace gausscert
