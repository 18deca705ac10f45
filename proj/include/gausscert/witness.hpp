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

#include "gausscert/gaussian_state.hpp"
#include "gausscert/linalg.hpp"
#include "gausscert/partitions.hpp"

namespace gausscert {

// Minimum eigenvalue of each block must be at least this fraction of the maximum.
inline constexpr double kOperatorPdTol = 1e-12;

/// Quadratic test operator L = x^T M_xx x + p^T M_pp p with both coefficient
/// blocks symmetric positive definite.
class TestOperator {
 public:
  static TestOperator create(Matrix m_xx, Matrix m_pp);
  static TestOperator identity(int n);

  int n() const { return static_cast<int>(m_xx_.rows()); }
  const Matrix& m_xx() const { return m_xx_; }
  const Matrix& m_pp() const { return m_pp_; }

  TestOperator scaled(double t) const;
  /// Rescaled so that Tr(M_xx + M_pp) = 2N.
  TestOperator normalized() const;

 private:
  TestOperator(Matrix m_xx, Matrix m_pp) : m_xx_(std::move(m_xx)), m_pp_(std::move(m_pp)) {}

  Matrix m_xx_;
  Matrix m_pp_;
};

struct WitnessResult {
  double expectation = 0.0;
  double bound = 0.0;
  double sigma_l = 0.0;
  double significance = 0.0;
  Partition partition = Partition::trivial(1);
  double added_noise = 0.0;

  bool entangled() const { return significance < 0.0; }
};

/// <L> = Tr(M_xx C_xx) + Tr(M_pp C_pp).
double expectation(const TestOperator& op, const CovarianceState& state);

/// Minimum of <L> over states separable with respect to `partition`:
/// sum over blocks of Tr[(M_pp^{1/2} M_xx M_pp^{1/2})^{1/2}] on the block's
/// principal submatrices.
double separable_bound(const TestOperator& op, const Partition& partition);

/// Error propagation assuming independent covariance entries:
/// sqrt(sum_ij M_xx,ij^2 sigma_xx,ji^2 + M_pp,ij^2 sigma_pp,ji^2).
double sigma_l(const TestOperator& op, const CovarianceState& state);

/// (<L> - g_min) / sigma(L). Throws InputError when sigma(L) = 0.
WitnessResult significance(const TestOperator& op, const CovarianceState& state, const Partition& partition,
                           double added_noise = 0.0);

}  // namespace gausscert
