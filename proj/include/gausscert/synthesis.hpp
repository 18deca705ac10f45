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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "gausscert/gaussian_state.hpp"

namespace gausscert {

/// Recipe for a synthetic comb-like state: independent squeezed supermodes
/// mixed onto the pixel modes by a seeded random orthogonal matrix.
struct CombSpec {
  int n_modes = 0;
  std::vector<double> squeezing_db;                     // x variance per supermode, dB vs vacuum
  std::optional<std::vector<double>> antisqueezing_db;  // p variance; default -squeezing_db (pure)
  std::uint64_t mixing_seed = 0;
  double excess_noise = 0.0;
  ErrorModel error_model;

  /// Throws InputError naming the first supermode whose variances violate
  /// v_x * v_p >= 1/4.
  void validate() const;

  static CombSpec from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

CombSpec load_comb_spec(const std::filesystem::path& path);

struct SupermodeReport {
  std::vector<double> squeezing_db;      // ascending, most squeezed first
  std::vector<double> antisqueezing_db;  // same order
  Matrix basis;                          // orthogonal, columns are supermodes
  double offdiagonal_residue = 0.0;      // max |(B^T C_pp B)_ij|, i != j
};

/// Haar-distributed orthogonal matrix from a seeded Gaussian matrix (QR with
/// sign-fixed R diagonal).
Matrix random_orthogonal(int n, std::uint64_t seed);

CovarianceState generate_comb_state(const CombSpec& spec);

/// Supermodes from the eigenbasis of C_xx, with C_pp read in that basis.
SupermodeReport extract_supermodes(const CovarianceState& state);

}  // namespace gausscert
