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

#include "gausscert/witness.hpp"

#include <Eigen/SVD>

#include <cmath>

#include "gausscert/errors.hpp"

namespace gausscert {

namespace {

void require_operator_block(const Matrix& m, Eigen::Index n, const char* name) {
  if (m.rows() != n || m.cols() != n) throw InputError(std::string(name) + " has wrong dimensions");
  if (!m.allFinite()) throw InputError(std::string(name) + " has non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double scale = std::max(std::abs(m(i, j)), std::abs(m(j, i)));
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale) throw InputError(std::string(name) + " is not symmetric");
    }
  }
  const Vector eig = symmetric_eigenvalues(symmetrized(m));
  if (!(eig(0) > 0.0) || eig(0) < kOperatorPdTol * eig(eig.size() - 1)) {
    throw InputError(std::string(name) + " is not positive definite (min eigenvalue " + std::to_string(eig(0)) +
                     ")");
  }
}

void require_same_size(const TestOperator& op, const CovarianceState& state) {
  if (op.n() != state.n_modes()) {
    throw InputError("operator acts on " + std::to_string(op.n()) + " modes but state has " +
                     std::to_string(state.n_modes()));
  }
}

}  // namespace

TestOperator TestOperator::create(Matrix m_xx, Matrix m_pp) {
  const Eigen::Index n = m_xx.rows();
  if (n < 1) throw InputError("test operator needs at least one mode");
  require_operator_block(m_xx, n, "m_xx");
  require_operator_block(m_pp, n, "m_pp");
  return TestOperator(symmetrized(m_xx), symmetrized(m_pp));
}

TestOperator TestOperator::identity(int n) {
  return TestOperator(Matrix::Identity(n, n), Matrix::Identity(n, n));
}

TestOperator TestOperator::scaled(double t) const {
  if (!(t > 0.0)) throw InputError("operator scale must be positive");
  return TestOperator(t * m_xx_, t * m_pp_);
}

TestOperator TestOperator::normalized() const {
  return scaled(2.0 * n() / (m_xx_.trace() + m_pp_.trace()));
}

double expectation(const TestOperator& op, const CovarianceState& state) {
  require_same_size(op, state);
  // Tr(AB) for symmetric A, B is the elementwise sum of products.
  return op.m_xx().cwiseProduct(state.c_xx()).sum() + op.m_pp().cwiseProduct(state.c_pp()).sum();
}

double separable_bound(const TestOperator& op, const Partition& partition) {
  if (partition.size() != op.n()) {
    throw InputError("partition covers " + std::to_string(partition.size()) + " modes but operator has " +
                     std::to_string(op.n()));
  }
  double total = 0.0;
  for (const auto& block : partition.blocks()) {
    const Matrix sub_xx = principal_submatrix(op.m_xx(), block);
    const Matrix sub_pp = principal_submatrix(op.m_pp(), block);
    try {
      // Tr (R_pp M_xx R_pp)^{1/2} is the sum of singular values of R_xx R_pp;
      // taking them directly avoids square roots of round-off near zero.
      const Matrix root_xx = psd_sqrt(sub_xx, "M_xx");
      const Matrix root_pp = psd_sqrt(sub_pp, "M_pp");
      total += Eigen::JacobiSVD<Matrix>(root_xx * root_pp).singularValues().sum();
    } catch (const ConditioningError& e) {
      std::string where;
      for (std::size_t i = 0; i < block.size(); ++i) where += (i ? "," : "") + std::to_string(block[i] + 1);
      throw ConditioningError(std::string(e.what()) + " on block {" + where + "}");
    }
  }
  return total;
}

double sigma_l(const TestOperator& op, const CovarianceState& state) {
  require_same_size(op, state);
  // sigma_ji is used with M_ij; error matrices are symmetric so transpose is explicit only for clarity.
  const double xx = op.m_xx().cwiseProduct(state.sigma_xx().transpose()).squaredNorm();
  const double pp = op.m_pp().cwiseProduct(state.sigma_pp().transpose()).squaredNorm();
  return std::sqrt(xx + pp);
}

WitnessResult significance(const TestOperator& op, const CovarianceState& state, const Partition& partition,
                           double added_noise) {
  WitnessResult r{.partition = partition};
  r.expectation = expectation(op, state);
  r.bound = separable_bound(op, partition);
  r.sigma_l = sigma_l(op, state);
  if (!(r.sigma_l > 0.0)) {
    throw InputError("sigma(L) is zero: supply error bars (sigma_xx/sigma_pp) or nonzero default error constants");
  }
  r.significance = (r.expectation - r.bound) / r.sigma_l;
  r.added_noise = added_noise;
  return r;
}

}  // namespace gausscert
