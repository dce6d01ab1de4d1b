#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "normprobe/experiment.hpp"
#include "normprobe/stats.hpp"

namespace normprobe::report {

enum class Format { markdown, csv, json };

std::string_view format_extension(Format f);
std::optional<Format> parse_format(std::string_view name);  // md, markdown, csv, json

// Fixed 4-decimal rendering, ties to even on the exact binary value.
std::string fixed4(double v);

// RANDOM, VANILLA, DISTINCT, BOTH
std::string_view shading_tag(experiment::Verdict v);

struct TableMetadata {
  std::string task;
  std::string encoder;
  std::string provenance;
  std::size_t n_runs = 0;
  double ci_level = stats::kConfidenceLevel;
  stats::CiMethod ci_method = stats::CiMethod::student_t;
  std::uint64_t master_seed = 0;
  std::string auc_mode = "macro one-vs-rest";
  std::vector<std::string> label_order;  // index = label_id
  std::optional<bool> norm_encoding;
};

// One row per condition: mean AUC, CI half-width and shading tag. Throws
// ConfigError when a summary lacks its classification or vice versa.
std::string render_results(const std::vector<stats::ConditionSummary>& summaries,
                           const std::vector<experiment::ConditionClassification>& classifications,
                           Format format, const TableMetadata& meta);

// Rows per task x transform, columns for the L1 and L2 coefficients (plus
// Kruskal-Wallis statistics where present).
std::string render_correlations(const std::vector<stats::CorrelationReport>& reports, Format format);

// JSON Lines, one record per run: task, condition, run_index, seed, auc.
std::string render_ledger(const std::vector<experiment::RunRecord>& records);
// JSON Lines with the wall time of each run.
std::string render_timings(const std::vector<experiment::RunRecord>& records);

// <task>__<encoder>__<kind>.<ext>
std::string output_file_name(std::string_view task, std::string_view encoder, std::string_view kind,
                             std::string_view extension);

std::string csv_field(std::string_view s);

}  // namespace normprobe::report
