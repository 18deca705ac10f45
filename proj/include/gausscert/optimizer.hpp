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
#include <span>
#include <vector>

#include <json.hpp>

#include "gausscert/gaussian_state.hpp"
#include "gausscert/partitions.hpp"
#include "gausscert/witness.hpp"

namespace gausscert {

/// Genetic-algorithm settings. Field names double as config-file keys.
struct GaConfig {
  int population = 48;
  int max_generations = 400;
  int stall_generations = 60;
  double mutation_scale = 0.1;
  double crossover_rate = 0.6;
  int elitism = 2;
  std::uint64_t seed = 1;

  /// Throws InputError on out-of-range settings.
  void validate() const;

  nlohmann::json to_json() const;
  /// Overlays the keys present in `doc` onto `base`; unknown keys are errors.
  static GaConfig from_json(const nlohmann::json& doc, GaConfig base);
  static GaConfig from_json(const nlohmann::json& doc);
};

/// JSON, or flat `key = value` TOML when the extension is ".toml".
/// `seed_set` reports whether the file specified a seed.
GaConfig load_ga_config(const std::filesystem::path& path, bool* seed_set = nullptr);

/// Lower-triangular factors of the two operator blocks. decode() always
/// yields a valid TestOperator: M_b = L_b L_b^T + eps_b I with
/// eps_b = 1e-9 Tr(L_b L_b^T)/N + 1e-12.
struct Genome {
  Matrix l_xx;
  Matrix l_pp;

  TestOperator decode() const;
  /// Cholesky factors of an existing operator.
  static Genome encode(const TestOperator& op);

  double norm() const;
  void normalize();
};

struct OptimizationOutcome {
  WitnessResult best;  // evaluated on best_operator
  TestOperator best_operator = TestOperator::identity(1);  // Tr(M_xx + M_pp) = 2N
  int generations_run = 0;
  long evaluations = 0;
  std::uint64_t seed_used = 0;
  double initial_best = 0.0;  // best significance among the initial population
  std::vector<double> best_trace;             // incumbent after each generation
  std::vector<double> population_best_trace;  // best member of each generation
};

/// Stable per-partition RNG seed, so a scan is reproducible under any schedule.
std::uint64_t partition_seed(std::uint64_t base_seed, const Partition& partition);

/// Deterministic starting operators: identity; inverse covariance blocks
/// (K >= 2 only, skipped when a block is singular); the leading singular
/// directions of C_xx^{-1/2} S C_pp^{-1/2} for block sign patterns S, as
/// rank-one and rank-r forms; and for each pair of partition blocks the two
/// EPR-style difference/sum quadratic forms.
std::vector<TestOperator> default_seeds(const CovarianceState& state, const Partition& partition);

/// Minimizes the significance over positive-definite test operators for one
/// partition. `state` must already be regularized; `added_noise` is only
/// carried into the result. `extra_seeds` join the initial population.
OptimizationOutcome optimize_witness(const CovarianceState& state, const Partition& partition,
                                     const GaConfig& config, double added_noise = 0.0,
                                     std::span<const TestOperator> extra_seeds = {});

}  // namespace gausscert
