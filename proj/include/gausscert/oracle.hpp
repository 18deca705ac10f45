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

#include "gausscert/gaussian_state.hpp"
#include "gausscert/partitions.hpp"
#include "gausscert/witness.hpp"

namespace gausscert {

// The direct search is only practical for small blocks.
inline constexpr int kMaxOracleModes = 3;

/// Numerically minimizes <L> over product states of the partition's blocks.
///
/// Each block is searched over pure uncorrelated Gaussian states
/// C_xx = A, C_pp = A^{-1}/4 with A = L L^T (log-Cholesky coordinates),
/// by multi-start Nelder-Mead. Independent of the closed-form bound: it uses
/// no matrix square roots. Returns the smallest value found.
double brute_force_bound(const TestOperator& op, const Partition& partition, int restarts,
                         std::uint64_t seed = 0x0dd5eedULL);

/// Gaussian partial-transpose test for a bipartition: flips the p quadratures
/// of the second block and reports whether the result is unphysical (NPT),
/// which for two-party Gaussian states is equivalent to entanglement.
bool pt_check(const CovarianceState& state, const Partition& bipartition);

}  // namespace gausscert
