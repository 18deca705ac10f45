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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gausscert/gaussian_state.hpp"
#include "gausscert/optimizer.hpp"
#include "gausscert/partitions.hpp"

namespace gausscert {

// Upper limit on the number of partitions a filtered scan may select.
inline constexpr std::uint64_t kMaxScanPartitions = 10'000'000;

/// One optimized partition.
struct ScanRow {
  std::string partition;  // 1-based colon/comma notation
  std::vector<int> rgs;
  int k = 0;
  double sigma = 0.0;  // significance
  double g_min = 0.0;
  double expectation = 0.0;
  double sigma_l = 0.0;
  double lambda = 0.0;
  int generations = 0;
  long evaluations = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const ScanRow&, const ScanRow&) = default;
};

struct KExtremes {
  int k = 0;
  int count = 0;
  int entangled = 0;
  double min_sigma = 0.0;
  std::string min_partition;
  double max_sigma = 0.0;
  std::string max_partition;

  friend bool operator==(const KExtremes&, const KExtremes&) = default;
};

struct ScanSummary {
  int evaluated = 0;
  int nontrivial = 0;
  int entangled_count = 0;  // Sigma < 0, trivial partition excluded
  bool all_nontrivial_entangled = false;
  std::vector<KExtremes> per_k;  // ascending K

  friend bool operator==(const ScanSummary&, const ScanSummary&) = default;
};

struct ScanReport {
  std::string state_label;
  int n_modes = 0;
  double added_noise = 0.0;
  std::string config_digest;
  nlohmann::json ga_config;
  std::vector<ScanRow> results;  // ascending Sigma, ties in canonical order
  ScanSummary summary;

  friend bool operator==(const ScanReport&, const ScanReport&) = default;
};

struct ScanOptions {
  GaConfig ga;
  std::optional<int> k;                 // only partitions with this many blocks
  std::vector<Partition> partitions;    // explicit list; overrides enumeration when nonempty
  std::optional<int> top;               // keep only the `top` most negative rows
  int jobs = 0;                         // 0: OpenMP default
  std::optional<std::filesystem::path> checkpoint;
  bool resume = false;
};

using RowCallback = std::function<void(const ScanRow&)>;

ScanRow optimize_row(const CovarianceState& state, double lambda, const Partition& partition, const GaConfig& config);

/// OpenMP-parallel map of optimize_witness over `partitions`; rows returned in
/// input order. `on_done` is invoked serially as rows finish.
std::vector<ScanRow> scan_partitions(const CovarianceState& state, double lambda, std::span<const Partition> partitions,
                                     const GaConfig& config, int jobs, const RowCallback& on_done = {});

/// Single-threaded reference for scan_partitions.
std::vector<ScanRow> scan_partitions_serial(const CovarianceState& state, double lambda,
                                            std::span<const Partition> partitions, const GaConfig& config,
                                            const RowCallback& on_done = {});

/// The partitions a scan would evaluate, honoring k / explicit list and the capacity guards.
std::vector<Partition> select_partitions(int n_modes, const ScanOptions& options);

std::string config_digest(const CovarianceState& state, const GaConfig& config);

/// Full pipeline: regularize, select, optimize (resuming from the checkpoint
/// when asked), sort and summarize.
ScanReport run_scan(const CovarianceState& state, const ScanOptions& options);

ScanSummary summarize(std::span<const ScanRow> rows);

/// Sort by Sigma ascending, ties broken by canonical partition order.
void sort_rows(std::vector<ScanRow>& rows);

struct ExtremeRow {
  int k = 0;
  std::string partition;  // brace notation
  double sigma = 0.0;
};

/// Lowest and highest Sigma for each K (one row when a K has a single partition).
std::vector<ExtremeRow> report_extremes(const ScanReport& report);
std::string format_extremes(const std::vector<ExtremeRow>& rows);

enum class ReportFormat { kJson, kCsv, kText };
ReportFormat parse_report_format(const std::string& name);

nlohmann::json report_to_json(const ScanReport& report);
ScanReport report_from_json(const nlohmann::json& doc);
nlohmann::json row_to_json(const ScanRow& row);
ScanRow row_from_json(const nlohmann::json& doc);

std::string report_to_csv(const ScanReport& report);
std::string report_to_text(const ScanReport& report);
std::string render_report(const ScanReport& report, ReportFormat format);

/// Writes the rendered report to `path` (IoError on failure).
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace gausscert
