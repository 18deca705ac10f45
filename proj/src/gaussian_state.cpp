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

#include "gausscert/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gausscert/errors.hpp"

namespace gausscert {

namespace {

std::string entry_name(const std::string& block, Eigen::Index i, Eigen::Index j) {
  return block + " entry (" + std::to_string(i) + "," + std::to_string(j) + ")";
}

void require_shape(const Matrix& m, Eigen::Index n, const std::string& block) {
  if (m.rows() != n || m.cols() != n) {
    throw InputError(block + " must be " + std::to_string(n) + "x" + std::to_string(n) + ", got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_symmetric_finite(const Matrix& m, const std::string& block) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) throw InputError(entry_name(block, i, j) + " is not finite");
    }
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      const double a = m(i, j);
      const double b = m(j, i);
      const double scale = std::max(std::abs(a), std::abs(b));
      if (std::abs(a - b) > kSymmetryTol * scale) {
        throw InputError(entry_name(block, i, j) + " differs from its transpose (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
      }
    }
  }
}

}  // namespace

Matrix ErrorModel::errors_for(const Matrix& c) const {
  return (rel_err * c.cwiseAbs()).array() + abs_err;
}

CovarianceState CovarianceState::create(Matrix c_xx, Matrix c_pp, std::optional<Matrix> sigma_xx,
                                        std::optional<Matrix> sigma_pp, const ErrorModel& errors,
                                        std::string label) {
  const Eigen::Index n = c_xx.rows();
  if (n < 1) throw InputError("state must have at least one mode");
  require_shape(c_xx, n, "c_xx");
  require_shape(c_pp, n, "c_pp");
  require_symmetric_finite(c_xx, "c_xx");
  require_symmetric_finite(c_pp, "c_pp");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(c_xx(i, i) > 0.0)) throw InputError(entry_name("c_xx", i, i) + " must be strictly positive");
    if (!(c_pp(i, i) > 0.0)) throw InputError(entry_name("c_pp", i, i) + " must be strictly positive");
  }
  if (errors.rel_err < 0.0 || errors.abs_err < 0.0) throw InputError("error model constants must be nonnegative");

  CovarianceState state;
  state.c_xx_ = symmetrized(c_xx);
  state.c_pp_ = symmetrized(c_pp);

  auto take_sigma = [&](std::optional<Matrix>& given, const Matrix& c, const std::string& block) {
    if (!given) return errors.errors_for(c);
    require_shape(*given, n, block);
    require_symmetric_finite(*given, block);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if ((*given)(i, j) < 0.0) throw InputError(entry_name(block, i, j) + " must be nonnegative");
      }
    }
    return Matrix(symmetrized(*given));
  };
  state.sigma_xx_ = take_sigma(sigma_xx, state.c_xx_, "sigma_xx");
  state.sigma_pp_ = take_sigma(sigma_pp, state.c_pp_, "sigma_pp");
  state.label_ = std::move(label);
  return state;
}

CovarianceState CovarianceState::with_white_noise(double lambda) const {
  CovarianceState out = *this;
  out.c_xx_.diagonal().array() += lambda;
  out.c_pp_.diagonal().array() += lambda;
  return out;
}

CovarianceState CovarianceState::vacuum(int n_modes, const ErrorModel& errors) {
  const Matrix half = kVacuumVariance * Matrix::Identity(n_modes, n_modes);
  return create(half, half, std::nullopt, std::nullopt, errors, "vacuum");
}

// ---------------------------------------------------------------------------
// Symplectic spectrum and physicality.

namespace {

struct Spectrum {
  std::vector<double> values;
  bool blocks_positive = false;
};

Spectrum symplectic_spectrum(const Matrix& c_xx, const Matrix& c_pp) {
  if (c_xx.rows() != c_pp.rows() || c_xx.cols() != c_pp.cols() || c_xx.rows() != c_xx.cols()) {
    throw InputError("covariance blocks have mismatched dimensions");
  }
  Spectrum out;
  Eigen::LLT<Matrix> llt_x(c_xx);
  Eigen::LLT<Matrix> llt_p(c_pp);
  if (llt_x.info() == Eigen::Success && llt_p.info() == Eigen::Success) {
    const Matrix lower = llt_x.matrixL();
    const Matrix product = lower.transpose() * c_pp * lower;
    Vector eig = symmetric_eigenvalues(symmetrized(product));
    for (Eigen::Index i = 0; i < eig.size(); ++i) out.values.push_back(std::sqrt(std::max(eig(i), 0.0)));
    out.blocks_positive = true;
  } else {
    Eigen::EigenSolver<Matrix> solver(c_xx * c_pp, false);
    const auto eig = solver.eigenvalues();
    for (Eigen::Index i = 0; i < eig.size(); ++i) out.values.push_back(std::sqrt(std::max(eig(i).real(), 0.0)));
  }
  std::sort(out.values.begin(), out.values.end());
  return out;
}

bool clears(const Spectrum& s, double threshold) {
  return s.blocks_positive && !s.values.empty() && s.values.front() >= threshold;
}

}  // namespace

std::vector<double> symplectic_eigenvalues(const Matrix& c_xx, const Matrix& c_pp) {
  return symplectic_spectrum(c_xx, c_pp).values;
}

std::vector<double> symplectic_eigenvalues(const CovarianceState& state) {
  return symplectic_eigenvalues(state.c_xx(), state.c_pp());
}

PhysicalityReport check_physicality(const CovarianceState& state) {
  Spectrum s = symplectic_spectrum(state.c_xx(), state.c_pp());
  PhysicalityReport report;
  report.is_physical = clears(s, kVacuumVariance - kPhysicalityTol);
  report.symplectic_eigenvalues = std::move(s.values);
  return report;
}

std::pair<CovarianceState, PhysicalityReport> regularize(const CovarianceState& state) {
  PhysicalityReport initial = check_physicality(state);
  if (initial.is_physical) return {state, std::move(initial)};

  const double target = kVacuumVariance + kRegularizationMargin;
  auto feasible = [&](double lambda) {
    Matrix cx = state.c_xx();
    Matrix cp = state.c_pp();
    cx.diagonal().array() += lambda;
    cp.diagonal().array() += lambda;
    return clears(symplectic_spectrum(cx, cp), target);
  };

  // Bracket: lo infeasible, hi feasible. The spectrum is monotone in lambda.
  double lo = 0.0;
  double hi = std::max(1e-3, target - initial.symplectic_eigenvalues.front());
  while (!feasible(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > kRegularizationTol) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  CovarianceState out = state.with_white_noise(hi);
  PhysicalityReport report = check_physicality(out);
  report.added_noise = hi;
  return {std::move(out), std::move(report)};
}

// ---------------------------------------------------------------------------
// Serialization.

StateFormat format_for_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? StateFormat::kCsv : StateFormat::kJson;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows, const std::string& key, Eigen::Index n) {
  if (!rows.is_array()) throw InputError(key + " must be an array of rows");
  if (static_cast<Eigen::Index>(rows.size()) != n) {
    throw InputError(key + " has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(n));
  }
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw InputError(key + " row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!row[j].is_number()) throw InputError(entry_name(key, i, j) + " is not a number");
      m(i, j) = row[j].get<double>();
    }
  }
  return m;
}

}  // namespace

nlohmann::json state_to_json(const CovarianceState& state) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["n_modes"] = state.n_modes();
  doc["convention"] = {{"vacuum_variance", kVacuumVariance}};
  doc["c_xx"] = matrix_to_json(state.c_xx());
  doc["c_pp"] = matrix_to_json(state.c_pp());
  doc["sigma_xx"] = matrix_to_json(state.sigma_xx());
  doc["sigma_pp"] = matrix_to_json(state.sigma_pp());
  if (!state.label().empty()) doc["label"] = state.label();
  return doc;
}

CovarianceState state_from_json(const nlohmann::json& doc, const ErrorModel& errors) {
  if (!doc.is_object()) throw InputError("state document must be a JSON object");
  if (doc.contains("version") && doc["version"] != 1) throw InputError("unsupported state file version");
  if (doc.contains("convention")) {
    const auto& conv = doc["convention"];
    if (conv.contains("vacuum_variance") &&
        (!conv["vacuum_variance"].is_number() || conv["vacuum_variance"].get<double>() != kVacuumVariance)) {
      throw InputError("only the vacuum_variance = 0.5 convention is supported");
    }
  }
  if (!doc.contains("c_xx") || !doc.contains("c_pp")) throw InputError("state file needs c_xx and c_pp");
  Eigen::Index n = doc["c_xx"].is_array() ? static_cast<Eigen::Index>(doc["c_xx"].size()) : 0;
  if (doc.contains("n_modes")) {
    if (!doc["n_modes"].is_number_integer() || doc["n_modes"].get<long long>() < 1) {
      throw InputError("n_modes must be a positive integer");
    }
    n = doc["n_modes"].get<Eigen::Index>();
  }
  Matrix c_xx = matrix_from_json(doc["c_xx"], "c_xx", n);
  Matrix c_pp = matrix_from_json(doc["c_pp"], "c_pp", n);
  std::optional<Matrix> s_xx;
  std::optional<Matrix> s_pp;
  if (doc.contains("sigma_xx")) s_xx = matrix_from_json(doc["sigma_xx"], "sigma_xx", n);
  if (doc.contains("sigma_pp")) s_pp = matrix_from_json(doc["sigma_pp"], "sigma_pp", n);
  std::string label = doc.value("label", std::string{});
  return CovarianceState::create(std::move(c_xx), std::move(c_pp), std::move(s_xx), std::move(s_pp), errors,
                                 std::move(label));
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Four (or two, without error bars) N x N blocks separated by blank lines;
// '#' starts a comment, "# label: text" sets the label.
CovarianceState parse_csv_state(const std::string& text, const ErrorModel& errors) {
  std::vector<std::vector<std::vector<double>>> blocks;
  std::vector<std::vector<double>> current;
  std::string label;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto close_block = [&]() {
    if (!current.empty()) blocks.push_back(std::move(current));
    current.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) {
      close_block();
      continue;
    }
    if (line[first] == '#') {
      const auto pos = line.find("label:");
      if (pos != std::string::npos) {
        label = line.substr(pos + 6);
        label.erase(0, label.find_first_not_of(" \t"));
      }
      continue;
    }
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      const auto rest = std::string(end).find_first_not_of(" \t");
      if (end == cell.c_str() || rest != std::string::npos) {
        throw InputError("line " + std::to_string(line_no) + ": cannot parse '" + cell + "' as a number");
      }
      row.push_back(v);
    }
    current.push_back(std::move(row));
  }
  close_block();
  if (blocks.size() != 2 && blocks.size() != 4) {
    throw InputError("CSV state needs 2 or 4 blank-line separated blocks, found " + std::to_string(blocks.size()));
  }
  const auto n = static_cast<Eigen::Index>(blocks[0].size());
  static const char* names[] = {"c_xx", "c_pp", "sigma_xx", "sigma_pp"};
  std::vector<Matrix> mats;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (static_cast<Eigen::Index>(blocks[b].size()) != n) {
      throw InputError(std::string(names[b]) + " has " + std::to_string(blocks[b].size()) + " rows, expected " +
                       std::to_string(n));
    }
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(blocks[b][i].size()) != n) {
        throw InputError(std::string(names[b]) + " row " + std::to_string(i) + " must have " + std::to_string(n) +
                         " entries");
      }
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = blocks[b][i][j];
    }
    mats.push_back(std::move(m));
  }
  std::optional<Matrix> s_xx;
  std::optional<Matrix> s_pp;
  if (mats.size() == 4) {
    s_xx = mats[2];
    s_pp = mats[3];
  }
  return CovarianceState::create(mats[0], mats[1], std::move(s_xx), std::move(s_pp), errors, std::move(label));
}

void write_csv_block(std::ostream& out, const Matrix& m) {
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace

CovarianceState load_state(const std::filesystem::path& path, StateFormat format, const ErrorModel& errors) {
  const std::string text = read_file(path);
  if (format == StateFormat::kCsv) return parse_csv_state(text, errors);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return state_from_json(doc, errors);
}

CovarianceState load_state(const std::filesystem::path& path, const ErrorModel& errors) {
  return load_state(path, format_for_path(path), errors);
}

void save_state(const CovarianceState& state, const std::filesystem::path& path, StateFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  if (format == StateFormat::kJson) {
    out << state_to_json(state).dump(2) << '\n';
  } else {
    out << "# gauss-certify state, vacuum_variance 0.5, blocks: c_xx, c_pp, sigma_xx, sigma_pp\n";
    if (!state.label().empty()) out << "# label: " << state.label() << '\n';
    write_csv_block(out, state.c_xx());
    out << '\n';
    write_csv_block(out, state.c_pp());
    out << '\n';
    write_csv_block(out, state.sigma_xx());
    out << '\n';
    write_csv_block(out, state.sigma_pp());
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gausscert
