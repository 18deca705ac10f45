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
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gausscert/errors.hpp"
#include "gausscert/gaussian_state.hpp"
#include "gausscert/optimizer.hpp"
#include "gausscert/oracle.hpp"
#include "gausscert/partitions.hpp"
#include "gausscert/scan.hpp"
#include "gausscert/synthesis.hpp"
#include "gausscert/witness.hpp"

namespace fs = std::filesystem;
using namespace gausscert;

namespace {

constexpr const char* kSeedEnv = "GAUSS_CERTIFY_SEED";

struct Options {
  std::string input;
  std::string out;
  std::string format;
  std::optional<int> k;
  std::vector<std::string> partitions;
  std::optional<int> top;
  int jobs = 0;
  std::optional<std::uint64_t> seed;
  std::string ga_config;
  std::string checkpoint;
  bool resume = false;
  std::optional<double> rel_err;
  std::optional<double> abs_err;
  int restarts = 20;
};

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

ErrorModel error_model(const Options& o) {
  ErrorModel m;
  if (o.rel_err) m.rel_err = *o.rel_err;
  if (o.abs_err) m.abs_err = *o.abs_err;
  if (!(m.rel_err >= 0.0) || !(m.abs_err >= 0.0)) throw InputError("--rel-err and --abs-err must be nonnegative");
  return m;
}

CovarianceState input_state(const Options& o) {
  if (o.input.empty()) throw InputError("--input is required");
  return load_state(o.input, error_model(o));
}

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 0);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InputError(what + " is not a nonnegative integer: '" + text + "'");
  }
}

// --seed, then the config file, then the environment, then the default.
GaConfig resolve_ga_config(const Options& o) {
  GaConfig config;
  bool file_seed = false;
  if (!o.ga_config.empty()) config = load_ga_config(o.ga_config, &file_seed);
  if (o.seed) {
    config.seed = *o.seed;
  } else if (!file_seed) {
    if (const char* env = std::getenv(kSeedEnv); env && *env) config.seed = parse_seed(env, kSeedEnv);
  }
  config.validate();
  return config;
}

// Explicit --format wins; otherwise guessed from the --out extension.
std::string output_format(const Options& o, const std::string& fallback) {
  if (!o.format.empty()) return o.format;
  if (!o.out.empty()) {
    const auto ext = fs::path(o.out).extension().string();
    if (ext == ".json") return "json";
    if (ext == ".csv") return "csv";
    if (ext == ".txt") return "text";
  }
  return fallback;
}

void emit(const Options& o, const std::string& content) {
  if (o.out.empty()) {
    std::cout << content;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to standard output");
    return;
  }
  write_text_file(o.out, content);
}

void require_format(const std::string& format, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (format == a) return;
  }
  throw InputError("unsupported --format '" + format + "'");
}

nlohmann::json spectrum_json(const std::vector<double>& v) { return nlohmann::json(v); }

int run_check(const Options& o) {
  const auto state = input_state(o);
  const auto before = check_physicality(state);
  const auto [fixed, after] = regularize(state);
  const auto format = output_format(o, "text");
  require_format(format, {"json", "text"});
  if (format == "json") {
    nlohmann::json doc{{"label", state.label()},
                       {"n_modes", state.n_modes()},
                       {"symplectic_eigenvalues", spectrum_json(before.symplectic_eigenvalues)},
                       {"min_symplectic_eigenvalue", before.symplectic_eigenvalues.front()},
                       {"is_physical", before.is_physical},
                       {"added_noise", after.added_noise},
                       {"regularized_symplectic_eigenvalues", spectrum_json(after.symplectic_eigenvalues)},
                       {"convention", {{"vacuum_variance", kVacuumVariance}}}};
    emit(o, doc.dump(2) + "\n");
    return 0;
  }
  std::ostringstream s;
  s << "state: " << (state.label().empty() ? o.input : state.label()) << " (" << state.n_modes() << " modes)\n";
  s << kConventionLine << "\n";
  s << "symplectic eigenvalues:";
  for (double v : before.symplectic_eigenvalues) s << ' ' << fmt(v, 10);
  s << "\nmin symplectic eigenvalue: " << fmt(before.symplectic_eigenvalues.front(), 10) << "\n";
  s << "physical: " << (before.is_physical ? "yes" : "no") << "\n";
  s << "lambda: " << fmt(after.added_noise, 12) << "\n";
  if (!before.is_physical) {
    s << "min symplectic eigenvalue after regularization: " << fmt(after.symplectic_eigenvalues.front(), 10) << "\n";
  }
  emit(o, s.str());
  return 0;
}

int run_scan_command(const Options& o) {
  const auto state = input_state(o);
  ScanOptions options;
  options.ga = resolve_ga_config(o);
  options.k = o.k;
  for (const auto& p : o.partitions) options.partitions.push_back(parse_partition(p, state.n_modes()));
  options.top = o.top;
  if (o.top && *o.top < 1) throw InputError("--top must be positive");
  if (o.jobs < 0) throw InputError("--jobs must be nonnegative");
  options.jobs = o.jobs;
  if (!o.checkpoint.empty()) {
    options.checkpoint = fs::path(o.checkpoint);
  } else if (o.resume) {
    if (o.out.empty()) throw InputError("--resume needs --checkpoint or --out");
    options.checkpoint = fs::path(o.out + ".ckpt.jsonl");
  }
  options.resume = o.resume;
  const auto format = output_format(o, "text");
  const auto report = run_scan(state, options);
  emit(o, render_report(report, parse_report_format(format)));
  return 0;
}

int run_extremes(const Options& o) {
  if (o.input.empty()) throw InputError("--input is required");
  std::ifstream in(o.input);
  if (!in) throw IoError("cannot open " + o.input);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(o.input + ": " + e.what());
  }
  const auto report = report_from_json(doc);
  if (report.results.empty()) throw InputError(o.input + ": report has no results");
  const auto rows = report_extremes(report);
  const auto format = output_format(o, "text");
  require_format(format, {"json", "csv", "text"});
  if (format == "json") {
    auto out = nlohmann::json::array();
    for (const auto& r : rows) out.push_back({{"k", r.k}, {"partition", r.partition}, {"sigma", r.sigma}});
    emit(o, out.dump(2) + "\n");
  } else if (format == "csv") {
    std::ostringstream s;
    s << "k,partition,sigma\n";
    for (const auto& r : rows) s << r.k << ",\"" << r.partition << "\"," << fmt(r.sigma, 17) << "\n";
    emit(o, s.str());
  } else {
    emit(o, format_extremes(rows));
  }
  return 0;
}

int run_synth(const Options& o) {
  if (o.input.empty()) throw InputError("--input is required");
  const auto spec = load_comb_spec(o.input);
  const auto state = generate_comb_state(spec);
  const auto format = output_format(o, "json");
  require_format(format, {"json", "csv"});
  if (o.out.empty()) {
    if (format != "json") throw InputError("CSV state output needs --out");
    emit(o, state_to_json(state).dump(2) + "\n");
    return 0;
  }
  save_state(state, o.out, format == "csv" ? StateFormat::kCsv : StateFormat::kJson);
  return 0;
}

int run_supermodes(const Options& o) {
  const auto state = input_state(o);
  const auto modes = extract_supermodes(state);
  const auto format = output_format(o, "text");
  require_format(format, {"json", "text"});
  if (format == "json") {
    auto basis = nlohmann::json::array();
    for (int i = 0; i < modes.basis.rows(); ++i) {
      std::vector<double> row(modes.basis.cols());
      for (int j = 0; j < modes.basis.cols(); ++j) row[j] = modes.basis(i, j);
      basis.push_back(row);
    }
    nlohmann::json doc{{"squeezing_db", modes.squeezing_db},
                       {"antisqueezing_db", modes.antisqueezing_db},
                       {"basis", basis},
                       {"offdiagonal_residue", modes.offdiagonal_residue}};
    emit(o, doc.dump(2) + "\n");
    return 0;
  }
  std::ostringstream s;
  s << "supermode  squeezing_dB  antisqueezing_dB\n";
  for (std::size_t k = 0; k < modes.squeezing_db.size(); ++k) {
    char line[96];
    std::snprintf(line, sizeof line, "%9zu  %12.4f  %16.4f\n", k + 1, modes.squeezing_db[k], modes.antisqueezing_db[k]);
    s << line;
  }
  s << "max off-diagonal C_pp in supermode basis: " << fmt(modes.offdiagonal_residue) << "\n";
  emit(o, s.str());
  return 0;
}

int run_oracle(const Options& o) {
  const auto state = input_state(o);
  if (state.n_modes() > kMaxOracleModes) {
    throw CapacityError("oracle supports at most " + std::to_string(kMaxOracleModes) + " modes");
  }
  if (o.partitions.size() != 1) throw InputError("oracle needs exactly one --partition");
  if (o.restarts < 1) throw InputError("--restarts must be positive");
  const auto partition = parse_partition(o.partitions.front(), state.n_modes());
  const auto config = resolve_ga_config(o);
  const auto [fixed, phys] = regularize(state);
  const auto outcome = optimize_witness(fixed, partition, config, phys.added_noise);
  const auto& op = outcome.best_operator;
  const auto result = significance(op, fixed, partition, phys.added_noise);
  const double closed = result.bound;
  const double brute = brute_force_bound(op, partition, o.restarts, config.seed);
  const double rel = std::abs(closed - brute) / std::max(std::abs(closed), 1e-300);
  std::optional<bool> npt;
  if (partition.num_blocks() == 2) npt = pt_check(fixed, partition);

  const auto format = output_format(o, "text");
  require_format(format, {"json", "text"});
  if (format == "json") {
    nlohmann::json doc{{"partition", partition.to_string()},
                       {"sigma", result.significance},
                       {"expectation", result.expectation},
                       {"g_min", closed},
                       {"g_min_brute_force", brute},
                       {"relative_difference", rel},
                       {"lambda", phys.added_noise}};
    if (npt) doc["npt"] = *npt;
    emit(o, doc.dump(2) + "\n");
    return 0;
  }
  std::ostringstream s;
  s << "partition: " << partition.to_braced() << "\n";
  s << "lambda: " << fmt(phys.added_noise, 12) << "\n";
  s << "sigma: " << fmt(result.significance, 10) << "\n";
  s << "<L>: " << fmt(result.expectation, 12) << "\n";
  s << "g_min closed form: " << fmt(closed, 12) << "\n";
  s << "g_min brute force: " << fmt(brute, 12) << "\n";
  s << "relative difference: " << fmt(rel, 3) << "\n";
  if (npt) s << "partial transpose: " << (*npt ? "NPT (entangled)" : "PPT") << "\n";
  emit(o, s.str());
  return 0;
}

void add_input(CLI::App* cmd, Options& o, const std::string& what) {
  cmd->add_option("--input", o.input, what)->required();
}

void add_output(CLI::App* cmd, Options& o, const std::string& formats) {
  cmd->add_option("--out", o.out, "Output file (default: standard output)");
  cmd->add_option("--format", o.format, "Output format: " + formats)->check(CLI::IsMember({"json", "csv", "text"}));
}

void add_errors(CLI::App* cmd, Options& o) {
  cmd->add_option("--rel-err", o.rel_err, "Relative error for entries without error bars (default 1e-3)");
  cmd->add_option("--abs-err", o.abs_err, "Absolute error for entries without error bars (default 1e-4)");
}

void add_ga(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, std::string("GA seed (fallback: config file, then $") + kSeedEnv + ")");
  cmd->add_option("--ga-config", o.ga_config, "GA settings, JSON or TOML");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certify full multipartite entanglement of Gaussian states from covariance data", "gauss-certify"};
  app.require_subcommand(1);
  Options o;

  auto* check = app.add_subcommand("check", "Symplectic spectrum, physicality and the white noise needed");
  add_input(check, o, "State file (.json or .csv)");
  add_output(check, o, "json|text");
  add_errors(check, o);

  auto* scan = app.add_subcommand("scan", "Optimize a witness for every selected partition");
  add_input(scan, o, "State file (.json or .csv)");
  add_output(scan, o, "json|csv|text");
  add_errors(scan, o);
  add_ga(scan, o);
  scan->add_option("--k", o.k, "Only partitions with K blocks");
  scan->add_option("--partition", o.partitions, "Explicit partition, e.g. \"1,2:3\" (repeatable)");
  scan->add_option("--top", o.top, "Keep the TOP most negative rows");
  scan->add_option("--jobs", o.jobs, "Worker threads (0: all processors)");
  scan->add_option("--checkpoint", o.checkpoint, "JSON-lines checkpoint of finished partitions");
  scan->add_flag("--resume", o.resume, "Reuse rows from the checkpoint");

  auto* extremes = app.add_subcommand("extremes", "Lowest and highest significance per K from a JSON scan report");
  add_input(extremes, o, "Scan report (.json)");
  add_output(extremes, o, "json|csv|text");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic comb state from a JSON spec");
  add_input(synth, o, "Comb spec (.json)");
  add_output(synth, o, "json|csv");

  auto* supermodes = app.add_subcommand("supermodes", "Squeezing spectrum in the C_xx eigenbasis");
  add_input(supermodes, o, "State file (.json or .csv)");
  add_output(supermodes, o, "json|text");
  add_errors(supermodes, o);

  auto* oracle = app.add_subcommand("oracle", "Compare the closed-form bound with a direct search (N <= 3)");
  add_input(oracle, o, "State file (.json or .csv)");
  add_output(oracle, o, "json|text");
  add_errors(oracle, o);
  add_ga(oracle, o);
  oracle->add_option("--partition", o.partitions, "Partition to test, e.g. \"1:2\"");
  oracle->add_option("--restarts", o.restarts, "Direct-search restarts per block");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*check) return run_check(o);
    if (*scan) return run_scan_command(o);
    if (*extremes) return run_extremes(o);
    if (*synth) return run_synth(o);
    if (*supermodes) return run_supermodes(o);
    if (*oracle) return run_oracle(o);
  } catch (const CapacityError& e) {
    std::cerr << "gauss-certify: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const IoError& e) {
    std::cerr << "gauss-certify: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "gauss-certify: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
