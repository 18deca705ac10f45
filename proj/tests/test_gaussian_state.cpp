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


#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <doctest.h>
#include <json.hpp>

#include "gausscert/errors.hpp"
#include "gausscert/gaussian_state.hpp"
#include "support.hpp"

using namespace gausscert;
using namespace gausscert::testing;
namespace fs = std::filesystem;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("gausscert_gs_" + name); }

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

// Two modes, thermal-ish x and correlated p, tuned so min nu = 0.49.
CovarianceState state_with_min_nu(double target) {
  Matrix cx(2, 2), cp(2, 2);
  cx << 0.8, 0.3, 0.3, 0.6;
  cp << 0.5, -0.1, -0.1, 0.7;
  const double nu = symplectic_eigenvalues(cx, cp).front();
  // nu scales linearly under C_pp -> s^2 C_pp, C_xx fixed
  const double s = target / nu;
  return CovarianceState::create(cx, s * s * cp);
}

}  // namespace

TEST_CASE("vacuum has all symplectic eigenvalues 1/2") {
  for (int n : {1, 3, 7}) {
    for (double nu : symplectic_eigenvalues(CovarianceState::vacuum(n))) CHECK(nu == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("pure single-mode squeezed state is symplectically vacuum") {
  for (double r : {0.0, 0.3, 1.0, 2.5}) {
    const auto s = CovarianceState::create(scalar(std::exp(-2 * r) / 2), scalar(std::exp(2 * r) / 2));
    CHECK(symplectic_eigenvalues(s).front() == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("single mode c_xx = c_pp = 1 has symplectic eigenvalue 1") {
  const auto s = CovarianceState::create(scalar(1.0), scalar(1.0));
  const auto ref = symplectic_spectrum_reference(s.c_xx(), s.c_pp());
  CHECK(ref.front() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(symplectic_eigenvalues(s).front() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("symplectic eigenvalues agree with the i*Omega*C reference") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 6;
    const auto s = random_physical_state(n, rng, 0.05 * (trial % 3));
    const auto got = symplectic_eigenvalues(s);
    const auto ref = symplectic_spectrum_reference(s.c_xx(), s.c_pp());
    REQUIRE(got.size() == ref.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-9));
    CHECK(std::is_sorted(got.begin(), got.end()));
  }
}

TEST_CASE("property: symplectic spectrum is invariant under orthogonal basis change") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    const auto s = random_physical_state(n, rng, 0.1);
    const Matrix o = random_rotation(n, rng);
    const auto t = CovarianceState::create(o * s.c_xx() * o.transpose(), o * s.c_pp() * o.transpose());
    const auto a = symplectic_eigenvalues(s);
    const auto b = symplectic_eigenvalues(t);
    for (int i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-9);
  }
}

TEST_CASE("mismatched block dimensions are an input error") {
  CHECK_THROWS_AS(symplectic_eigenvalues(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), InputError);
  CHECK_THROWS_AS(CovarianceState::create(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), InputError);
}

TEST_CASE("construction validates and symmetrizes") {
  Matrix cx(2, 2);
  cx << 1.0, 0.2, 0.2 * (1 + 1e-13), 1.0;
  const auto s = CovarianceState::create(cx, Matrix::Identity(2, 2));
  CHECK(s.c_xx()(0, 1) == s.c_xx()(1, 0));

  Matrix bad = cx;
  bad(0, 1) += 1e-3;
  CHECK_THROWS_WITH_AS(CovarianceState::create(bad, Matrix::Identity(2, 2)), doctest::Contains("(0,1)"), InputError);

  Matrix neg = Matrix::Identity(2, 2);
  neg(1, 1) = 0.0;
  CHECK_THROWS_AS(CovarianceState::create(neg, Matrix::Identity(2, 2)), InputError);
  CHECK_THROWS_AS(CovarianceState::create(Matrix::Identity(2, 2), neg), InputError);
  Matrix sig = Matrix::Constant(2, 2, 0.01);
  sig(0, 1) = -0.01;
  CHECK_THROWS_AS(CovarianceState::create(cx, cx, sig), InputError);
}

TEST_CASE("default error bars are rel*|C| + abs") {
  Matrix cx(2, 2);
  cx << 2.0, -0.5, -0.5, 1.0;
  const auto s = CovarianceState::create(cx, Matrix::Identity(2, 2));
  CHECK(s.sigma_xx()(0, 0) == doctest::Approx(1e-3 * 2.0 + 1e-4));
  CHECK(s.sigma_xx()(0, 1) == doctest::Approx(1e-3 * 0.5 + 1e-4));
  CHECK(s.sigma_pp()(1, 0) == doctest::Approx(1e-4));
  const auto t = CovarianceState::create(cx, Matrix::Identity(2, 2), std::nullopt, std::nullopt, ErrorModel{0.01, 0.0});
  CHECK(t.sigma_xx()(1, 1) == doctest::Approx(0.01));
}

TEST_CASE("physicality report") {
  const auto vac = check_physicality(CovarianceState::vacuum(3));
  CHECK(vac.is_physical);
  CHECK(vac.added_noise == 0.0);
  const auto bad = check_physicality(CovarianceState::create(scalar(0.4), scalar(0.4)));
  CHECK_FALSE(bad.is_physical);
  const auto edge = check_physicality(CovarianceState::create(scalar(0.5 - 5e-10), scalar(0.5)));
  CHECK(edge.is_physical);
}

TEST_CASE("regularize leaves physical states unchanged") {
  const auto vac = CovarianceState::vacuum(2);
  const auto [out, report] = regularize(vac);
  CHECK(report.added_noise == 0.0);
  CHECK(out.c_xx() == vac.c_xx());
  CHECK(out.c_pp() == vac.c_pp());
}

TEST_CASE("regularize single mode 0.4 needs lambda 0.1") {
  const auto s = CovarianceState::create(scalar(0.4), scalar(0.4));
  const auto [out, report] = regularize(s);
  CHECK(std::abs(report.added_noise - 0.1) <= 1e-8);
  CHECK(check_physicality(out).is_physical);
  CHECK(out.sigma_xx() == s.sigma_xx());
}

TEST_CASE("regularize two-mode state with min nu 0.49") {
  const auto s = state_with_min_nu(0.49);
  CHECK(symplectic_eigenvalues(s).front() == doctest::Approx(0.49).epsilon(1e-12));
  const auto [out, report] = regularize(s);
  CHECK(report.added_noise == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(symplectic_eigenvalues(out).front() >= 0.5);
  // the returned lambda is within bisection tolerance of the smallest feasible one
  const double below = report.added_noise - 2 * kRegularizationTol;
  CHECK(symplectic_eigenvalues(s.with_white_noise(below)).front() < 0.5 + kRegularizationMargin);
}

TEST_CASE("property: regularize is idempotent") {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    const auto base = random_physical_state(n, rng);
    std::uniform_real_distribution<double> shrink(0.6, 0.99);
    const double f = shrink(rng);
    const auto s = CovarianceState::create(f * base.c_xx(), f * base.c_pp());
    const auto [once, r1] = regularize(s);
    const auto [twice, r2] = regularize(once);
    CHECK(r1.added_noise > 0.0);
    CHECK(r2.added_noise == 0.0);
    CHECK(twice.c_xx() == once.c_xx());
    CHECK(twice.c_pp() == once.c_pp());
  }
}

TEST_CASE("property: min symplectic eigenvalue is nondecreasing in added noise") {
  Rng rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = random_physical_state(1 + trial % 5, rng);
    double prev = -1.0;
    for (double lambda = 0.0; lambda <= 1.0; lambda += 0.05) {
      const double nu = symplectic_eigenvalues(s.with_white_noise(lambda)).front();
      CHECK(nu >= prev - 1e-12);
      prev = nu;
    }
  }
}

TEST_CASE("minimal JSON loads as a one-mode vacuum") {
  const auto p = temp_file("min.json");
  write(p, R"({"n_modes": 1, "c_xx": [[0.5]], "c_pp": [[0.5]]})");
  const auto s = load_state(p);
  CHECK(s.n_modes() == 1);
  CHECK(s.c_xx()(0, 0) == 0.5);
  CHECK(s.sigma_xx()(0, 0) == doctest::Approx(1e-3 * 0.5 + 1e-4));
  fs::remove(p);
}

TEST_CASE("JSON asymmetry names the entry") {
  nlohmann::json doc = {{"n_modes", 2}, {"c_xx", {{1.0, 0.201}, {0.2, 1.0}}}, {"c_pp", {{1.0, 0.0}, {0.0, 1.0}}}};
  CHECK_THROWS_WITH_AS(state_from_json(doc), doctest::Contains("(0,1)"), InputError);
}

TEST_CASE("JSON rejects bad documents") {
  CHECK_THROWS_AS(state_from_json(nlohmann::json::array()), InputError);
  CHECK_THROWS_AS(state_from_json({{"c_xx", {{1.0}}}}), InputError);
  CHECK_THROWS_AS(state_from_json({{"version", 2}, {"c_xx", {{1.0}}}, {"c_pp", {{1.0}}}}), InputError);
  CHECK_THROWS_AS(state_from_json({{"convention", {{"vacuum_variance", 1.0}}}, {"c_xx", {{1.0}}}, {"c_pp", {{1.0}}}}),
                  InputError);
  CHECK_THROWS_AS(state_from_json({{"n_modes", 2}, {"c_xx", {{1.0}}}, {"c_pp", {{1.0}}}}), InputError);
  CHECK_THROWS_AS(state_from_json({{"c_xx", {{"a"}}}, {"c_pp", {{1.0}}}}), InputError);
  CHECK_THROWS_AS(load_state(temp_file("does_not_exist.json")), IoError);
  const auto p = temp_file("broken.json");
  write(p, "{ not json");
  CHECK_THROWS_AS(load_state(p), InputError);
  fs::remove(p);
}

TEST_CASE("property: JSON round trip is bit-exact") {
  Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 5;
    const auto base = random_physical_state(n, rng, 0.01);
    const auto s = CovarianceState::create(base.c_xx(), base.c_pp(), random_spd(n, rng).cwiseAbs(),
                                           std::nullopt, ErrorModel{}, "trial " + std::to_string(trial));
    const auto p = temp_file("rt.json");
    save_state(s, p, StateFormat::kJson);
    const auto t = load_state(p);
    CHECK(t.c_xx() == s.c_xx());
    CHECK(t.c_pp() == s.c_pp());
    CHECK(t.sigma_xx() == s.sigma_xx());
    CHECK(t.sigma_pp() == s.sigma_pp());
    CHECK(t.label() == s.label());
    fs::remove(p);
  }
}

TEST_CASE("CSV round trip and two-block files") {
  Rng rng(16);
  const auto s = random_physical_state(3, rng, 0.02);
  const auto p = temp_file("rt.csv");
  save_state(s, p, StateFormat::kCsv);
  const auto t = load_state(p);
  CHECK(t.c_xx() == s.c_xx());
  CHECK(t.c_pp() == s.c_pp());
  CHECK(t.sigma_xx() == s.sigma_xx());
  fs::remove(p);

  const auto q = temp_file("two.csv");
  write(q, "# two blocks only\n0.5,0\n0,0.5\n\n0.5,0\n0,0.5\n");
  const auto v = load_state(q);
  CHECK(v.n_modes() == 2);
  CHECK(v.sigma_pp()(0, 0) == doctest::Approx(1e-3 * 0.5 + 1e-4));
  write(q, "0.5,0\n0,0.5\n");
  CHECK_THROWS_AS(load_state(q), InputError);
  write(q, "0.5,x\n0,0.5\n\n0.5,0\n0,0.5\n");
  CHECK_THROWS_AS(load_state(q), InputError);
  fs::remove(q);
}

TEST_CASE("format is chosen from the extension") {
  CHECK(format_for_path("a.json") == StateFormat::kJson);
  CHECK(format_for_path("a.csv") == StateFormat::kCsv);
  CHECK(format_for_path("a.txt") == StateFormat::kJson);
  CHECK(format_for_path("A.CSV") == StateFormat::kCsv);
}
