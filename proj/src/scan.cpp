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

#include "gausscert/scan.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gausscert/errors.hpp"

namespace gausscert {

ScanRow optimize_row(const CovarianceState& state, double lambda, const Partition& partition, const GaConfig& config) {
  const OptimizationOutcome outcome = optimize_witness(state, partition, config, lambda);
  ScanRow row;
  row.partition = partition.to_string();
  row.rgs = partition.rgs();
  row.k = partition.num_blocks();
  row.sigma = outcome.best.significance;
  row.g_min = outcome.best.bound;
  row.expectation = outcome.best.expectation;
  row.sigma_l = outcome.best.sigma_l;
  row.lambda = lambda;
  row.generations = outcome.generations_run;
  row.evaluations = outcome.evaluations;
  row.seed = outcome.seed_used;
  return row;
}

std::vector<ScanRow> scan_partitions_serial(const CovarianceState& state, double lambda,
                                            std::span<const Partition> partitions, const GaConfig& config,
                                            const RowCallback& on_done) {
  std::vector<ScanRow> rows;
  rows.reserve(partitions.size());
  for (const auto& p : partitions) {
    rows.push_back(optimize_row(state, lambda, p, config));
    if (on_done) on_done(rows.back());
  }
  return rows;
}

std::vector<ScanRow> scan_partitions(const CovarianceState& state, double lambda, std::span<const Partition> partitions,
                                     const GaConfig& config, int jobs, const RowCallback& on_done) {
  std::vector<ScanRow> rows(partitions.size());
  std::exception_ptr failure;
  std::mutex callback_mutex;
  const auto count = static_cast<long>(partitions.size());
#ifdef _OPENMP
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#else
  (void)jobs;
#endif
  for (long i = 0; i < count; ++i) {
    try {
      rows[i] = optimize_row(state, lambda, partitions[i], config);
      if (on_done) {
        std::lock_guard lock(callback_mutex);
        on_done(rows[i]);
      }
    } catch (...) {
      std::lock_guard lock(callback_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::vector<Partition> select_partitions(int n_modes, const ScanOptions& options) {
  if (!options.partitions.empty()) {
    std::vector<Partition> out;
    for (const auto& p : options.partitions) {
      if (p.size() != n_modes) {
        throw InputError("partition " + p.to_string() + " does not cover " + std::to_string(n_modes) + " modes");
      }
      if (options.k && p.num_blocks() != *options.k) continue;
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
    if (out.empty()) throw InputError("no partition matches the requested filters");
    return out;
  }
  if (n_modes > kMaxBellModes) {
    throw CapacityError("scans are limited to " + std::to_string(kMaxBellModes) + " modes");
  }
  if (!options.k) return enumerate_partitions(n_modes);
  if (*options.k < 1 || *options.k > n_modes) {
    throw InputError("--k must be in [1, " + std::to_string(n_modes) + "]");
  }
  if (stirling2(n_modes, *options.k) > kMaxScanPartitions) {
    throw CapacityError("K = " + std::to_string(*options.k) + " selects " +
                        std::to_string(stirling2(n_modes, *options.k)) + " partitions, above the limit of " +
                        std::to_string(kMaxScanPartitions));
  }
  PartitionEnumerator it(n_modes, *options.k);
  std::vector<Partition> out;
  while (auto p = it.next()) out.push_back(std::move(*p));
  return out;
}

std::string config_digest(const CovarianceState& state, const GaConfig& config) {
  const nlohmann::json doc{{"ga", config.to_json()}, {"state", state_to_json(state)}};
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void sort_rows(std::vector<ScanRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ScanRow& a, const ScanRow& b) {
    if (a.sigma != b.sigma) return a.sigma < b.sigma;
    return a.rgs < b.rgs;
  });
}

ScanSummary summarize(std::span<const ScanRow> rows) {
  ScanSummary s;
  std::map<int, const ScanRow*> min_row;
  std::map<int, const ScanRow*> max_row;
  std::map<int, KExtremes> per_k;
  for (const auto& row : rows) {
    ++s.evaluated;
    const bool trivial = row.k == 1;
    auto& e = per_k[row.k];
    e.k = row.k;
    ++e.count;
    if (!trivial) {
      ++s.nontrivial;
      if (row.sigma < 0.0) {
        ++s.entangled_count;
        ++e.entangled;
      }
    }
    auto& lo = min_row[row.k];
    if (!lo || row.sigma < lo->sigma || (row.sigma == lo->sigma && row.rgs < lo->rgs)) lo = &row;
    auto& hi = max_row[row.k];
    if (!hi || row.sigma > hi->sigma || (row.sigma == hi->sigma && row.rgs < hi->rgs)) hi = &row;
  }
  for (auto& [k, e] : per_k) {
    e.min_sigma = min_row[k]->sigma;
    e.min_partition = min_row[k]->partition;
    e.max_sigma = max_row[k]->sigma;
    e.max_partition = max_row[k]->partition;
    s.per_k.push_back(e);
  }
  s.all_nontrivial_entangled = s.nontrivial > 0 && s.entangled_count == s.nontrivial;
  return s;
}

// ---------------------------------------------------------------------------
// Checkpointing: append-only JSON lines, header first.

namespace {

class Checkpoint {
 public:
  Checkpoint(const std::filesystem::path& path, const std::string& digest, bool resume) : path_(path) {
    bool have_header = false;
    if (resume && std::filesystem::exists(path)) {
      std::ifstream in(path);
      if (!in) throw IoError("cannot read checkpoint " + path.string());
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
          break;  // torn final line from an interrupted write
        }
        if (!have_header) {
          if (doc.value("config_digest", std::string{}) != digest) {
            throw InputError("checkpoint " + path.string() + " was written for a different state or GA config");
          }
          have_header = true;
          continue;
        }
        ScanRow row = row_from_json(doc);
        completed_[row.rgs] = std::move(row);
      }
    }
    out_.open(path, have_header ? std::ios::app : std::ios::trunc);
    if (!out_) throw IoError("cannot write checkpoint " + path.string());
    if (!have_header) {
      out_ << nlohmann::json{{"checkpoint", 1}, {"config_digest", digest}}.dump() << '\n';
      out_.flush();
    }
  }

  const ScanRow* find(const std::vector<int>& rgs) const {
    auto it = completed_.find(rgs);
    return it == completed_.end() ? nullptr : &it->second;
  }

  void append(const ScanRow& row) {
    out_ << row_to_json(row).dump() << '\n';
    out_.flush();
    if (!out_) throw IoError("failed writing checkpoint " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::map<std::vector<int>, ScanRow> completed_;
  std::ofstream out_;
};

}  // namespace

ScanReport run_scan(const CovarianceState& state, const ScanOptions& options) {
  options.ga.validate();
  const auto partitions = select_partitions(state.n_modes(), options);
  const auto [regularized, physicality] = regularize(state);
  const double lambda = physicality.added_noise;

  ScanReport report;
  report.state_label = state.label();
  report.n_modes = state.n_modes();
  report.added_noise = lambda;
  report.config_digest = config_digest(state, options.ga);
  report.ga_config = options.ga.to_json();

  std::optional<Checkpoint> checkpoint;
  if (options.checkpoint) checkpoint.emplace(*options.checkpoint, report.config_digest, options.resume);

  std::vector<ScanRow> rows(partitions.size());
  std::vector<Partition> todo;
  std::vector<std::size_t> todo_index;
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    const ScanRow* done = checkpoint ? checkpoint->find(partitions[i].rgs()) : nullptr;
    if (done) {
      rows[i] = *done;
    } else {
      todo.push_back(partitions[i]);
      todo_index.push_back(i);
    }
  }

  RowCallback on_done;
  if (checkpoint) on_done = [&](const ScanRow& row) { checkpoint->append(row); };
  std::vector<ScanRow> computed = options.jobs == 1
                                      ? scan_partitions_serial(regularized, lambda, todo, options.ga, on_done)
                                      : scan_partitions(regularized, lambda, todo, options.ga, options.jobs, on_done);
  for (std::size_t j = 0; j < computed.size(); ++j) rows[todo_index[j]] = std::move(computed[j]);

  sort_rows(rows);
  report.summary = summarize(rows);
  if (options.top && static_cast<std::size_t>(*options.top) < rows.size()) rows.resize(*options.top);
  report.results = std::move(rows);
  return report;
}

// ---------------------------------------------------------------------------
// Extremes table.

std::vector<ExtremeRow> report_extremes(const ScanReport& report) {
  std::vector<ExtremeRow> out;
  const int n = report.n_modes;
  auto braced = [n](const std::string& text) { return parse_partition(text, n).to_braced(); };
  for (const auto& e : report.summary.per_k) {
    if (e.count == 1) {
      out.push_back({e.k, braced(e.min_partition), e.min_sigma});
    } else {
      out.push_back({e.k, braced(e.max_partition), e.max_sigma});
      out.push_back({e.k, braced(e.min_partition), e.min_sigma});
    }
  }
  return out;
}

std::string format_extremes(const std::vector<ExtremeRow>& rows) {
  std::size_t width = 9;
  for (const auto& r : rows) width = std::max(width, r.partition.size());
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%4s  ", "K");
  out << buf << "Partition" << std::string(width - 9, ' ') << "  " << "   Sigma\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%4d  ", r.k);
    out << buf << r.partition << std::string(width - r.partition.size(), ' ');
    std::snprintf(buf, sizeof buf, "  %+8.2f\n", r.sigma);
    out << buf;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Serialization.

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "text") return ReportFormat::kText;
  throw InputError("unknown report format '" + name + "' (expected json, csv or text)");
}

nlohmann::json row_to_json(const ScanRow& row) {
  return {{"partition", row.partition}, {"rgs", row.rgs},       {"k", row.k},
          {"sigma", row.sigma},         {"g_min", row.g_min},   {"expectation", row.expectation},
          {"sigma_l", row.sigma_l},     {"lambda", row.lambda}, {"generations", row.generations},
          {"evaluations", row.evaluations}, {"seed", row.seed}};
}

ScanRow row_from_json(const nlohmann::json& doc) {
  try {
    ScanRow row;
    row.partition = doc.at("partition").get<std::string>();
    row.rgs = doc.at("rgs").get<std::vector<int>>();
    row.k = doc.at("k").get<int>();
    row.sigma = doc.at("sigma").get<double>();
    row.g_min = doc.at("g_min").get<double>();
    row.expectation = doc.at("expectation").get<double>();
    row.sigma_l = doc.at("sigma_l").get<double>();
    row.lambda = doc.at("lambda").get<double>();
    row.generations = doc.at("generations").get<int>();
    row.evaluations = doc.at("evaluations").get<long>();
    row.seed = doc.at("seed").get<std::uint64_t>();
    return row;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed result row: ") + e.what());
  }
}

nlohmann::json report_to_json(const ScanReport& report) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& row : report.results) results.push_back(row_to_json(row));
  nlohmann::json per_k = nlohmann::json::array();
  for (const auto& e : report.summary.per_k) {
    per_k.push_back({{"k", e.k},
                     {"count", e.count},
                     {"entangled", e.entangled},
                     {"min_sigma", e.min_sigma},
                     {"min_partition", e.min_partition},
                     {"max_sigma", e.max_sigma},
                     {"max_partition", e.max_partition}});
  }
  return {{"version", 1},
          {"state_label", report.state_label},
          {"n_modes", report.n_modes},
          {"convention", {{"vacuum_variance", kVacuumVariance}}},
          {"added_noise", report.added_noise},
          {"config_digest", report.config_digest},
          {"ga_config", report.ga_config},
          {"results", std::move(results)},
          {"summary",
           {{"evaluated", report.summary.evaluated},
            {"nontrivial", report.summary.nontrivial},
            {"entangled_count", report.summary.entangled_count},
            {"all_nontrivial_entangled", report.summary.all_nontrivial_entangled},
            {"per_k", std::move(per_k)}}}};
}

ScanReport report_from_json(const nlohmann::json& doc) {
  try {
    ScanReport report;
    report.state_label = doc.at("state_label").get<std::string>();
    report.n_modes = doc.at("n_modes").get<int>();
    report.added_noise = doc.at("added_noise").get<double>();
    report.config_digest = doc.at("config_digest").get<std::string>();
    report.ga_config = doc.at("ga_config");
    for (const auto& row : doc.at("results")) report.results.push_back(row_from_json(row));
    const auto& s = doc.at("summary");
    report.summary.evaluated = s.at("evaluated").get<int>();
    report.summary.nontrivial = s.at("nontrivial").get<int>();
    report.summary.entangled_count = s.at("entangled_count").get<int>();
    report.summary.all_nontrivial_entangled = s.at("all_nontrivial_entangled").get<bool>();
    for (const auto& e : s.at("per_k")) {
      report.summary.per_k.push_back({e.at("k").get<int>(), e.at("count").get<int>(), e.at("entangled").get<int>(),
                                      e.at("min_sigma").get<double>(), e.at("min_partition").get<std::string>(),
                                      e.at("max_sigma").get<double>(), e.at("max_partition").get<std::string>()});
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed scan report: ") + e.what());
  }
}

std::string report_to_csv(const ScanReport& report) {
  std::ostringstream out;
  out << "partition,k,sigma,g_min,expectation,sigma_l,lambda,seed\n";
  char buf[256];
  for (const auto& r : report.results) {
    std::snprintf(buf, sizeof buf, "\"%s\",%d,%.17g,%.17g,%.17g,%.17g,%.17g,%llu\n", r.partition.c_str(), r.k,
                  r.sigma, r.g_min, r.expectation, r.sigma_l, r.lambda, static_cast<unsigned long long>(r.seed));
    out << buf;
  }
  return out.str();
}

std::string report_to_text(const ScanReport& report) {
  std::ostringstream out;
  char buf[256];
  out << "state: " << (report.state_label.empty() ? "(unlabelled)" : report.state_label) << '\n';
  out << "modes: " << report.n_modes << '\n';
  out << kConventionLine << '\n';
  std::snprintf(buf, sizeof buf, "added white noise lambda: %.6g\n", report.added_noise);
  out << buf;
  out << "config digest: " << report.config_digest << '\n';
  const auto& s = report.summary;
  out << "partitions evaluated: " << s.evaluated << " (nontrivial " << s.nontrivial << ")\n";
  out << "entangled nontrivial partitions: " << s.entangled_count << " of " << s.nontrivial << '\n';
  const bool complete = report.n_modes <= kMaxBellModes &&
                        static_cast<std::uint64_t>(s.evaluated) == bell_number(report.n_modes);
  out << (complete ? "full multipartite entanglement: " : "every evaluated nontrivial partition entangled: ")
      << (s.all_nontrivial_entangled ? "yes" : "no") << "\n\n";
  out << "extremes per K:\n" << format_extremes(report_extremes(report)) << '\n';
  out << "partitions sorted by significance:\n";
  std::snprintf(buf, sizeof buf, "%6s %4s %10s  %s\n", "rank", "K", "Sigma", "partition");
  out << buf;
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    const auto& r = report.results[i];
    std::snprintf(buf, sizeof buf, "%6zu %4d %+10.3f  ", i + 1, r.k, r.sigma);
    out << buf << r.partition << '\n';
  }
  return out.str();
}

std::string render_report(const ScanReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson:
      return report_to_json(report).dump(2) + "\n";
    case ReportFormat::kCsv:
      return report_to_csv(report);
    case ReportFormat::kText:
      return report_to_text(report);
  }
  return {};
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gausscert
