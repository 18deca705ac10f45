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

#include <span>
#include <string>

#include <Eigen/Dense>

namespace gausscert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Rows and columns of `m` restricted to `indices` (0-based, in the given order).
Matrix principal_submatrix(const Matrix& m, std::span<const int> indices);

/// Eigenvalues of a symmetric matrix, ascending.
Vector symmetric_eigenvalues(const Matrix& m);

/// Eigenvalues of a symmetric PSD matrix with round-off negatives clamped to 0.
///
/// Eigenvalues in [-rel_tol * max|eig|, 0) become 0; anything more negative
/// throws ConditioningError mentioning `what`.
Vector psd_eigenvalues(const Matrix& m, const std::string& what, double rel_tol = 1e-10);

/// Principal square root of a symmetric PSD matrix, same clamping rule as psd_eigenvalues.
Matrix psd_sqrt(const Matrix& m, const std::string& what, double rel_tol = 1e-10);

/// Trace of the square root, i.e. the sum of sqrt(eigenvalues) of a PSD matrix.
double psd_sqrt_trace(const Matrix& m, const std::string& what, double rel_tol = 1e-10);

bool is_positive_definite(const Matrix& m);

}  // namespace gausscert
