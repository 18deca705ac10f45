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

#include "gausscert/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "gausscert/errors.hpp"

namespace gausscert {

Matrix principal_submatrix(const Matrix& m, std::span<const int> indices) {
  const auto d = static_cast<Eigen::Index>(indices.size());
  Matrix sub(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      sub(i, j) = m(indices[i], indices[j]);
    }
  }
  return sub;
}

Vector symmetric_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

namespace {

void clamp_spectrum(Vector& eig, const std::string& what, double rel_tol) {
  const double scale = eig.size() == 0 ? 0.0 : eig.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    if (eig(i) >= 0.0) continue;
    if (eig(i) < -rel_tol * scale) {
      throw ConditioningError(what + ": matrix is not positive semidefinite (eigenvalue " +
                              std::to_string(eig(i)) + ")");
    }
    eig(i) = 0.0;
  }
}

}  // namespace

Vector psd_eigenvalues(const Matrix& m, const std::string& what, double rel_tol) {
  Vector eig = symmetric_eigenvalues(m);
  clamp_spectrum(eig, what, rel_tol);
  return eig;
}

Matrix psd_sqrt(const Matrix& m, const std::string& what, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  Vector eig = solver.eigenvalues();
  clamp_spectrum(eig, what, rel_tol);
  const Matrix& v = solver.eigenvectors();
  return v * eig.cwiseSqrt().asDiagonal() * v.transpose();
}

double psd_sqrt_trace(const Matrix& m, const std::string& what, double rel_tol) {
  return psd_eigenvalues(m, what, rel_tol).cwiseSqrt().sum();
}

bool is_positive_definite(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace gausscert
