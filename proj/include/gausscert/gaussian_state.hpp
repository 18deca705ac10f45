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

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gausscert/linalg.hpp"

namespace gausscert {

// Quadratures are ordered (x_1..x_N, p_1..p_N); every variance is expressed in
// units where the vacuum has variance 1/2 per quadrature.
inline constexpr double kVacuumVariance = 0.5;

inline constexpr const char* kConventionLine =
    "convention: vacuum variance 0.5, quadratures ordered (x_1..x_N, p_1..p_N)";

// Physicality threshold: min symplectic eigenvalue >= vacuum - kPhysicalityTol.
inline constexpr double kPhysicalityTol = 1e-9;

// Target clearance above vacuum reached by regularize().
inline constexpr double kRegularizationMargin = 5e-9;

// Absolute bisection tolerance on the added white noise.
inline constexpr double kRegularizationTol = 1e-10;

// Relative asymmetry accepted (and silently removed) on input.
inline constexpr double kSymmetryTol = 1e-12;

/// Fills in error bars that a state file does not provide:
/// sigma(C_ij) = rel_err * |C_ij| + abs_err.
struct ErrorModel {
  double rel_err = 1e-3;
  double abs_err = 1e-4;

  Matrix errors_for(const Matrix& c) const;
};

/// An N-mode Gaussian state with negligible x-p correlations, stored as its
/// xx and pp covariance blocks plus per-entry measurement errors.
///
/// Immutable once built; create() validates and symmetrizes.
class CovarianceState {
 public:
  static CovarianceState create(Matrix c_xx, Matrix c_pp, std::optional<Matrix> sigma_xx = std::nullopt,
                                std::optional<Matrix> sigma_pp = std::nullopt, const ErrorModel& errors = {},
                                std::string label = {});

  int n_modes() const { return static_cast<int>(c_xx_.rows()); }
  const Matrix& c_xx() const { return c_xx_; }
  const Matrix& c_pp() const { return c_pp_; }
  const Matrix& sigma_xx() const { return sigma_xx_; }
  const Matrix& sigma_pp() const { return sigma_pp_; }
  const std::string& label() const { return label_; }

  /// c_xx + lambda*I, c_pp + lambda*I; error bars untouched.
  CovarianceState with_white_noise(double lambda) const;

  static CovarianceState vacuum(int n_modes, const ErrorModel& errors = {});

 private:
  CovarianceState() = default;

  Matrix c_xx_;
  Matrix c_pp_;
  Matrix sigma_xx_;
  Matrix sigma_pp_;
  std::string label_;
};

struct PhysicalityReport {
  std::vector<double> symplectic_eigenvalues;  // ascending
  bool is_physical = false;
  double added_noise = 0.0;
};

/// Symplectic spectrum of diag(c_xx, c_pp), ascending.
///
/// For block-diagonal covariances the eigenvalues of i*Omega*C are
/// +-sqrt(eig(c_xx c_pp)); with c_xx = L L^T these are the square roots of the
/// eigenvalues of the symmetric matrix L^T c_pp L. Indefinite blocks fall
/// back to a general eigensolver with negative products mapped to 0.
std::vector<double> symplectic_eigenvalues(const Matrix& c_xx, const Matrix& c_pp);
std::vector<double> symplectic_eigenvalues(const CovarianceState& state);

PhysicalityReport check_physicality(const CovarianceState& state);

/// Adds the smallest uniform white noise lambda*I to both blocks so that the
/// state becomes physical. Already-physical inputs come back unchanged with
/// lambda = 0; otherwise lambda is bisected until the minimal symplectic
/// eigenvalue clears vacuum by kRegularizationMargin.
std::pair<CovarianceState, PhysicalityReport> regularize(const CovarianceState& state);

enum class StateFormat { kJson, kCsv };

/// kCsv for a ".csv" extension, kJson otherwise.
StateFormat format_for_path(const std::filesystem::path& path);

nlohmann::json state_to_json(const CovarianceState& state);
CovarianceState state_from_json(const nlohmann::json& doc, const ErrorModel& errors = {});

CovarianceState load_state(const std::filesystem::path& path, StateFormat format, const ErrorModel& errors = {});
CovarianceState load_state(const std::filesystem::path& path, const ErrorModel& errors = {});
void save_state(const CovarianceState& state, const std::filesystem::path& path, StateFormat format);

}  // namespace gausscert
