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


// Independent reference computations and random fixtures for the tests.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "gausscert/gaussian_state.hpp"
#include "gausscert/partitions.hpp"
#include "gausscert/witness.hpp"

namespace gausscert::testing {

using Rng = std::mt19937_64;

inline Matrix random_gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

// Haar-ish orthogonal from Householder QR, independent of the library version.
inline Matrix random_rotation(int n, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_gaussian(n, n, rng));
  return qr.householderQ() * Matrix::Identity(n, n);
}

// Positive definite with eigenvalues in [lo, hi].
inline Matrix random_spd(int n, Rng& rng, double lo = 0.05, double hi = 3.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = u(rng);
  const Matrix o = random_rotation(n, rng);
  Matrix m = o * d.asDiagonal() * o.transpose();
  return 0.5 * (m + m.transpose());
}

inline TestOperator random_operator(int n, Rng& rng) {
  return TestOperator::create(random_spd(n, rng, 0.01, 4.0), random_spd(n, rng, 0.01, 4.0));
}

// Pure block-diagonal state C_xx = A, C_pp = A^-1/4, plus optional thermal noise.
inline CovarianceState random_physical_state(int n, Rng& rng, double noise = 0.0) {
  const Matrix a = random_spd(n, rng, 0.1, 2.0);
  Matrix cp = 0.25 * a.inverse();
  cp = 0.5 * (cp + cp.transpose());
  return CovarianceState::create(a + noise * Matrix::Identity(n, n), cp + noise * Matrix::Identity(n, n));
}

// Direct sum of independent physical states, one per block of q.
inline CovarianceState product_state(const Partition& q, Rng& rng, double noise = 0.0) {
  const int n = q.size();
  Matrix cx = Matrix::Zero(n, n);
  Matrix cp = Matrix::Zero(n, n);
  for (const auto& block : q.blocks()) {
    const int m = static_cast<int>(block.size());
    const auto local = random_physical_state(m, rng, noise);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        cx(block[i], block[j]) = local.c_xx()(i, j);
        cp(block[i], block[j]) = local.c_pp()(i, j);
      }
  }
  return CovarianceState::create(cx, cp);
}

inline CovarianceState two_mode_squeezed(double r, const ErrorModel& errors = {}) {
  const double c = std::cosh(2 * r) / 2, s = std::sinh(2 * r) / 2;
  Matrix cx(2, 2), cp(2, 2);
  cx << c, s, s, c;
  cp << c, -s, -s, c;
  return CovarianceState::create(cx, cp, std::nullopt, std::nullopt, errors, "tmsv");
}

// Symplectic spectrum from the eigenvalues of i*Omega*C on the full 2N x 2N matrix.
inline std::vector<double> symplectic_spectrum_reference(const Matrix& cx, const Matrix& cp) {
  const int n = static_cast<int>(cx.rows());
  Matrix c = Matrix::Zero(2 * n, 2 * n);
  c.topLeftCorner(n, n) = cx;
  c.bottomRightCorner(n, n) = cp;
  Matrix omega = Matrix::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = Matrix::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  const Eigen::MatrixXcd m = std::complex<double>(0, 1) * (omega * c).cast<std::complex<double>>();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
  std::vector<double> all;
  for (int i = 0; i < 2 * n; ++i) all.push_back(std::abs(es.eigenvalues()(i).real()));
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (int i = 0; i < 2 * n; i += 2) out.push_back(0.5 * (all[i] + all[i + 1]));
  return out;
}

// Tr sqrt(Mp^1/2 Mx Mp^1/2) equals the sum of sqrt(eig(Mx Mp)), computed here
// with a nonsymmetric eigensolver.
inline double separable_bound_reference(const Matrix& mx, const Matrix& mp, const Partition& p) {
  double total = 0.0;
  for (const auto& block : p.blocks()) {
    const int m = static_cast<int>(block.size());
    Matrix a(m, m), b(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        a(i, j) = mx(block[i], block[j]);
        b(i, j) = mp(block[i], block[j]);
      }
    Eigen::EigenSolver<Matrix> es(a * b);
    for (int i = 0; i < m; ++i) total += std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  }
  return total;
}

// All set partitions by recursive insertion, as canonical label vectors.
inline void all_partitions_reference(int n, std::vector<int>& labels, int blocks, std::set<std::vector<int>>& out) {
  const int j = static_cast<int>(labels.size());
  if (j == n) {
    out.insert(labels);
    return;
  }
  for (int b = 0; b <= blocks; ++b) {
    labels.push_back(b);
    all_partitions_reference(n, labels, std::max(blocks, b + 1), out);
    labels.pop_back();
  }
}

inline std::set<std::vector<int>> all_partitions_reference(int n) {
  std::set<std::vector<int>> out;
  std::vector<int> labels;
  all_partitions_reference(n, labels, 0, out);
  return out;
}

// S(n,k) = 1/k! sum_j (-1)^j C(k,j) (k-j)^n, in long double.
inline double stirling2_reference(int n, int k) {
  long double sum = 0, binom = 1, fact = 1;
  for (int i = 1; i <= k; ++i) fact *= i;
  for (int j = 0; j <= k; ++j) {
    sum += ((j % 2) ? -1 : 1) * binom * std::pow(static_cast<long double>(k - j), n);
    binom = binom * (k - j) / (j + 1);
  }
  return static_cast<double>(std::llround(sum / fact));
}

inline Partition random_partition(int n, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<int> labels(n);
  for (auto& l : labels) l = pick(rng);
  return Partition::from_labels(labels);
}

// A random partition that `fine` refines: merge blocks of `fine` at random.
inline Partition random_coarsening(const Partition& fine, Rng& rng) {
  const int k = fine.num_blocks();
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::vector<int> merge(k);
  for (auto& m : merge) m = pick(rng);
  std::vector<int> labels(fine.size());
  for (int i = 0; i < fine.size(); ++i) labels[i] = merge[fine.rgs()[i]];
  return Partition::from_labels(labels);
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace gausscert::testing
