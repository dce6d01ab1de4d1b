#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "normprobe/corpus.hpp"

namespace normprobe::stats {

inline constexpr double kConfidenceLevel = 0.99;
inline constexpr std::size_t kBootstrapResamples = 10000;

struct RunResult {
  std::string condition_id;
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  double auc = 0.0;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

enum class CiMethod { student_t, bootstrap };

std::string_view ci_method_name(CiMethod m);
std::optional<CiMethod> parse_ci_method(std::string_view name);

struct ConditionSummary {
  std::string condition_id;
  std::size_t n_runs = 0;
  double mean_auc = 0.0;
  double ci_half_width = 0.0;
  std::vector<RunResult> runs;

  double lower() const noexcept { return mean_auc - ci_half_width; }
  double upper() const noexcept { return mean_auc + ci_half_width; }
};

// One-vs-rest AUC of `positive` against every other label: the probability
// that a random positive outscores a random negative, ties counting one
// half. Computed from average ranks.
double binary_auc(std::span<const double> scores, std::span<const LabelId> labels, LabelId positive);

// AUC-ROC from a score matrix (n_examples x n_classes). Two classes: column 1
// scores label 1. More classes: unweighted mean of the one-vs-rest AUCs of
// the classes present in `labels`; absent classes are skipped and appended
// to `skipped`. Throws DataError when fewer than two classes are present.
double auc_roc(const Eigen::MatrixXd& scores, std::span<const LabelId> labels,
               std::vector<LabelId>* skipped = nullptr);

// Mean and 99% CI half-width over >= 2 runs. student_t: t_{0.995,n-1} s/sqrt(n).
// bootstrap: half the width of the 0.5%..99.5% percentile interval of
// resampled means (kBootstrapResamples draws seeded by bootstrap_seed).
ConditionSummary summarize(std::vector<RunResult> runs, CiMethod method = CiMethod::student_t,
                           std::uint64_t bootstrap_seed = 0);

// CI-overlap criterion: true iff the closed intervals intersect.
bool same_distribution(const ConditionSummary& a, const ConditionSummary& b);

// Product-moment correlation (two-pass). Throws DataError for mismatched or
// too-short inputs and for constant inputs.
double pearson(std::span<const double> x, std::span<const double> y);

struct KruskalWallis {
  double h = 0.0;
  double p = 1.0;
};

// H statistic with ties correction; p-value from chi-squared with k-1 dof.
KruskalWallis kruskal_wallis(const std::vector<std::vector<double>>& groups);

struct CorrelationReport {
  std::string task;
  std::string transform;
  double pearson_l1 = 0.0;
  double pearson_l2 = 0.0;
  std::optional<double> kruskal_h_l1;
  std::optional<double> kruskal_p_l1;
  std::optional<double> kruskal_h_l2;
  std::optional<double> kruskal_p_l2;
  std::size_t n = 0;
};

}  // namespace normprobe::stats
