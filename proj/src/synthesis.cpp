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

#include "gausscert/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "gausscert/errors.hpp"

namespace gausscert {

namespace {

double db_to_variance(double db) { return kVacuumVariance * std::pow(10.0, db / 10.0); }
double variance_to_db(double v) { return 10.0 * std::log10(v / kVacuumVariance); }

std::vector<double> antisqueezing_or_default(const CombSpec& spec) {
  if (spec.antisqueezing_db) return *spec.antisqueezing_db;
  std::vector<double> out(spec.squeezing_db.size());
  std::transform(spec.squeezing_db.begin(), spec.squeezing_db.end(), out.begin(), [](double d) { return -d; });
  return out;
}

}  // namespace

void CombSpec::validate() const {
  if (n_modes < 1) throw InputError("comb spec: n_modes must be positive");
  if (static_cast<int>(squeezing_db.size()) != n_modes) {
    throw InputError("comb spec: squeezing_db needs " + std::to_string(n_modes) + " entries");
  }
  if (antisqueezing_db && static_cast<int>(antisqueezing_db->size()) != n_modes) {
    throw InputError("comb spec: antisqueezing_db needs " + std::to_string(n_modes) + " entries");
  }
  if (!(excess_noise >= 0.0)) throw InputError("comb spec: excess_noise must be nonnegative");
  if (error_model.rel_err < 0.0 || error_model.abs_err < 0.0) {
    throw InputError("comb spec: error_model constants must be nonnegative");
  }
  const auto anti = antisqueezing_or_default(*this);
  for (int k = 0; k < n_modes; ++k) {
    if (!std::isfinite(squeezing_db[k]) || !std::isfinite(anti[k])) {
      throw InputError("comb spec: supermode " + std::to_string(k + 1) + " has non-finite levels");
    }
    // v_x v_p >= 1/4  <=>  sqz_dB + antisqz_dB >= 0
    if (squeezing_db[k] + anti[k] < -1e-12) {
      throw InputError("comb spec: supermode " + std::to_string(k + 1) + " violates the uncertainty relation (" +
                       std::to_string(squeezing_db[k]) + " dB / " + std::to_string(anti[k]) + " dB)");
    }
  }
}

CombSpec CombSpec::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("comb spec must be a JSON object");
  static const std::set<std::string> known{"n_modes",      "squeezing_db", "antisqueezing_db",
                                           "mixing_seed",  "excess_noise", "error_model"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw InputError("comb spec: unknown field '" + key + "'");
  }
  CombSpec spec;
  try {
    spec.n_modes = doc.at("n_modes").get<int>();
    spec.squeezing_db = doc.at("squeezing_db").get<std::vector<double>>();
    if (doc.contains("antisqueezing_db") && !doc["antisqueezing_db"].is_null()) {
      spec.antisqueezing_db = doc["antisqueezing_db"].get<std::vector<double>>();
    }
    spec.mixing_seed = doc.value("mixing_seed", std::uint64_t{0});
    spec.excess_noise = doc.value("excess_noise", 0.0);
    if (doc.contains("error_model")) {
      const auto& em = doc["error_model"];
      spec.error_model.rel_err = em.value("rel_err", spec.error_model.rel_err);
      spec.error_model.abs_err = em.value("abs_err", spec.error_model.abs_err);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("comb spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

nlohmann::json CombSpec::to_json() const {
  nlohmann::json doc{{"n_modes", n_modes},
                     {"squeezing_db", squeezing_db},
                     {"mixing_seed", mixing_seed},
                     {"excess_noise", excess_noise},
                     {"error_model", {{"rel_err", error_model.rel_err}, {"abs_err", error_model.abs_err}}}};
  if (antisqueezing_db) doc["antisqueezing_db"] = *antisqueezing_db;
  return doc;
}

CombSpec load_comb_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return CombSpec::from_json(nlohmann::json::parse(buf.str()));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

Matrix random_orthogonal(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

CovarianceState generate_comb_state(const CombSpec& spec) {
  spec.validate();
  const int n = spec.n_modes;
  const auto anti = antisqueezing_or_default(spec);
  Vector vx(n);
  Vector vp(n);
  for (int k = 0; k < n; ++k) {
    vx(k) = db_to_variance(spec.squeezing_db[k]);
    vp(k) = db_to_variance(anti[k]);
  }
  const Matrix o = random_orthogonal(n, spec.mixing_seed);
  Matrix c_xx = symmetrized(o * vx.asDiagonal() * o.transpose());
  Matrix c_pp = symmetrized(o * vp.asDiagonal() * o.transpose());
  c_xx.diagonal().array() += spec.excess_noise;
  c_pp.diagonal().array() += spec.excess_noise;
  return CovarianceState::create(std::move(c_xx), std::move(c_pp), std::nullopt, std::nullopt, spec.error_model,
                                 "synthetic comb, " + std::to_string(n) + " modes, seed " +
                                     std::to_string(spec.mixing_seed));
}

SupermodeReport extract_supermodes(const CovarianceState& state) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(state.c_xx());
  const Matrix& basis = solver.eigenvectors();
  const Matrix pp_in_basis = basis.transpose() * state.c_pp() * basis;
  const int n = state.n_modes();

  struct Mode {
    double sqz;
    double anti;
    int column;
  };
  std::vector<Mode> modes;
  for (int k = 0; k < n; ++k) {
    const double vx = solver.eigenvalues()(k);
    const double vp = pp_in_basis(k, k);
    modes.push_back({variance_to_db(std::min(vx, vp)), variance_to_db(std::max(vx, vp)), k});
  }
  std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) { return a.sqz < b.sqz; });

  SupermodeReport report;
  report.basis.resize(n, n);
  for (int k = 0; k < n; ++k) {
    report.squeezing_db.push_back(modes[k].sqz);
    report.antisqueezing_db.push_back(modes[k].anti);
    report.basis.col(k) = basis.col(modes[k].column);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) report.offdiagonal_residue = std::max(report.offdiagonal_residue, std::abs(pp_in_basis(i, j)));
    }
  }
  return report;
}

}  // namespace gausscert
