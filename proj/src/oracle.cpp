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

#include "gausscert/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "gausscert/errors.hpp"

namespace gausscert {

namespace {

using Objective = std::function<double(const Vector&)>;

struct SearchResult {
  Vector x;
  double value;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
SearchResult nelder_mead(const Objective& f, const Vector& start, double step, int max_evals) {
  const auto dim = start.size();
  std::vector<Vector> simplex(dim + 1, start);
  std::vector<double> values(dim + 1);
  for (Eigen::Index i = 0; i < dim; ++i) simplex[i + 1](i) += step;
  for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = f(simplex[i]);
  int evals = static_cast<int>(simplex.size());

  std::vector<std::size_t> order(simplex.size());
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    const double spread = values[worst] - values[best];
    double size = 0.0;
    for (const auto& v : simplex) size = std::max(size, (v - simplex[best]).cwiseAbs().maxCoeff());
    if (spread <= 1e-15 * std::abs(values[best]) && size < 1e-9) break;

    Vector centroid = Vector::Zero(dim);
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(dim);

    const Vector reflected = centroid + (centroid - simplex[worst]);
    const double f_reflected = f(reflected);
    ++evals;
    if (f_reflected < values[best]) {
      const Vector expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double f_expanded = f(expanded);
      ++evals;
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const Vector contracted =
        outside ? Vector(centroid + 0.5 * (reflected - centroid)) : Vector(centroid + 0.5 * (simplex[worst] - centroid));
    const double f_contracted = f(contracted);
    ++evals;
    if (f_contracted < std::min(f_reflected, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = f(simplex[i]);
      ++evals;
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  return {simplex[best], values[best]};
}

// Tr(M_xx A) + Tr(M_pp A^{-1})/4 with A = L L^T, L lower triangular with
// exp() on the diagonal.
class BlockObjective {
 public:
  BlockObjective(Matrix m_xx, Matrix m_pp) : m_xx_(std::move(m_xx)), m_pp_(std::move(m_pp)) {}

  int dim() const { return static_cast<int>(m_xx_.rows() * (m_xx_.rows() + 1) / 2); }

  double operator()(const Vector& theta) const {
    const Eigen::Index d = m_xx_.rows();
    Matrix lower = Matrix::Zero(d, d);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) lower(i, j) = theta(k++);
      if (std::abs(theta(k)) > 300.0) return std::numeric_limits<double>::infinity();
      lower(i, i) = std::exp(theta(k++));
    }
    const Matrix a = lower * lower.transpose();
    const Matrix lower_inv = lower.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
    const Matrix a_inv = lower_inv.transpose() * lower_inv;
    const double value = m_xx_.cwiseProduct(a).sum() + 0.25 * m_pp_.cwiseProduct(a_inv).sum();
    return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
  }

 private:
  Matrix m_xx_;
  Matrix m_pp_;
};

double minimize_block(const BlockObjective& objective, int restarts, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto f = [&](const Vector& x) { return objective(x); };
  const int max_evals = 4000 * objective.dim();
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Vector start(objective.dim());
    for (Eigen::Index i = 0; i < start.size(); ++i) start(i) = 0.5 * normal(rng);
    SearchResult result = nelder_mead(f, start, 0.5, max_evals);
    // Re-seed the simplex at the optimum until it stops moving.
    for (int polish = 0; polish < 20; ++polish) {
      SearchResult again = nelder_mead(f, result.x, 0.05, max_evals);
      const bool improved = again.value < result.value - 1e-15 * std::abs(result.value);
      if (again.value < result.value) result = std::move(again);
      if (!improved) break;
    }
    best = std::min(best, result.value);
  }
  return best;
}

}  // namespace

double brute_force_bound(const TestOperator& op, const Partition& partition, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw InputError("brute_force_bound: restarts must be at least 1");
  if (partition.size() != op.n()) throw InputError("brute_force_bound: partition size does not match operator");
  if (partition.size() > kMaxOracleModes) {
    throw CapacityError("brute_force_bound supports at most " + std::to_string(kMaxOracleModes) + " modes");
  }
  std::mt19937_64 rng(seed);
  double total = 0.0;
  for (const auto& block : partition.blocks()) {
    BlockObjective objective(principal_submatrix(op.m_xx(), block), principal_submatrix(op.m_pp(), block));
    total += minimize_block(objective, restarts, rng);
  }
  return total;
}

bool pt_check(const CovarianceState& state, const Partition& bipartition) {
  if (bipartition.num_blocks() != 2) {
    throw InputError("pt_check needs a bipartition (K = 2), got K = " + std::to_string(bipartition.num_blocks()));
  }
  if (bipartition.size() != state.n_modes()) throw InputError("pt_check: partition size does not match state");
  Vector signs = Vector::Ones(state.n_modes());
  for (int j : bipartition.blocks()[1]) signs(j) = -1.0;
  const Matrix flipped = signs.asDiagonal() * state.c_pp() * signs.asDiagonal();
  const auto nu = symplectic_eigenvalues(state.c_xx(), flipped);
  return nu.front() < kVacuumVariance - kPhysicalityTol;
}

}  // namespace gausscert
