#include "normprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "normprobe/error.hpp"
#include "normprobe/rng.hpp"

namespace normprobe::stats {
namespace {

// Average (1-based) ranks of `values`; ties share the mean of their ranks.
// Also returns sum over tie groups of (t^3 - t).
std::vector<double> average_ranks(std::span<const double> values, double* tie_term = nullptr) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  double ties = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  if (tie_term) *tie_term = ties;
  return ranks;
}

}  // namespace

std::string_view ci_method_name(CiMethod m) {
  return m == CiMethod::student_t ? "t" : "bootstrap";
}

std::optional<CiMethod> parse_ci_method(std::string_view name) {
  if (name == "t") return CiMethod::student_t;
  if (name == "bootstrap") return CiMethod::bootstrap;
  return std::nullopt;
}

double binary_auc(std::span<const double> scores, std::span<const LabelId> labels, LabelId positive) {
  if (scores.size() != labels.size()) throw DataError("auc: scores and labels differ in length");
  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (labels[i] == positive) {
      rank_sum += ranks[i];
      n_pos += 1.0;
    }
  }
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw DataError("auc: need both positive and negative examples");
  const double u = rank_sum - n_pos * (n_pos + 1.0) / 2.0;
  return u / (n_pos * n_neg);
}

double auc_roc(const Eigen::MatrixXd& scores, std::span<const LabelId> labels,
               std::vector<LabelId>* skipped) {
  const auto n = static_cast<std::size_t>(scores.rows());
  if (n != labels.size()) throw DataError("auc: scores and labels differ in length");
  const auto k = static_cast<std::size_t>(scores.cols());
  if (k < 2) throw DataError("auc: need at least two score columns");

  std::vector<std::size_t> counts(k, 0);
  for (LabelId y : labels) {
    if (y >= k) throw DataError("auc: label " + std::to_string(y) + " has no score column");
    ++counts[y];
  }
  const auto present = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  if (present < 2) throw DataError("auc: labels contain fewer than two classes");

  std::vector<double> column(n);
  auto one_vs_rest = [&](std::size_t c) {
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    }
    return binary_auc(column, labels, static_cast<LabelId>(c));
  };

  if (k == 2) return one_vs_rest(1);

  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0 || counts[c] == n) {
      if (skipped) skipped->push_back(static_cast<LabelId>(c));
      continue;
    }
    total += one_vs_rest(c);
    ++used;
  }
  return total / static_cast<double>(used);
}

ConditionSummary summarize(std::vector<RunResult> runs, CiMethod method, std::uint64_t bootstrap_seed) {
  if (runs.size() < 2) throw ComputeError("summarize: need at least 2 runs, got " + std::to_string(runs.size()));
  ConditionSummary s;
  s.condition_id = runs.front().condition_id;
  s.n_runs = runs.size();
  const double n = static_cast<double>(runs.size());

  double sum = 0.0;
  for (const auto& r : runs) sum += r.auc;
  s.mean_auc = sum / n;

  if (method == CiMethod::student_t) {
    double ss = 0.0;
    for (const auto& r : runs) ss += (r.auc - s.mean_auc) * (r.auc - s.mean_auc);
    const double sd = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t_distribution<double> t(n - 1.0);
    const double q = boost::math::quantile(t, 0.5 + kConfidenceLevel / 2.0);
    s.ci_half_width = q * sd / std::sqrt(n);
  } else {
    SeededRng rng(bootstrap_seed);
    std::uniform_int_distribution<std::size_t> pick(0, runs.size() - 1);
    std::vector<double> means(kBootstrapResamples);
    for (double& m : means) {
      double acc = 0.0;
      for (std::size_t i = 0; i < runs.size(); ++i) acc += runs[pick(rng.engine())].auc;
      m = acc / n;
    }
    std::sort(means.begin(), means.end());
    auto quantile = [&](double p) {
      const double pos = p * static_cast<double>(means.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, means.size() - 1);
      return means[lo] + (pos - static_cast<double>(lo)) * (means[hi] - means[lo]);
    };
    const double alpha = 1.0 - kConfidenceLevel;
    s.ci_half_width = 0.5 * (quantile(1.0 - alpha / 2.0) - quantile(alpha / 2.0));
  }
  s.runs = std::move(runs);
  return s;
}

bool same_distribution(const ConditionSummary& a, const ConditionSummary& b) {
  return a.lower() <= b.upper() && b.lower() <= a.upper();
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson: inputs differ in length");
  if (x.size() < 3) throw DataError("pearson: need at least 3 observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("pearson: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

KruskalWallis kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw DataError("kruskal_wallis: need at least 2 groups");
  std::vector<double> pooled;
  std::vector<std::size_t> group_of;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw DataError("kruskal_wallis: group " + std::to_string(g) + " is empty");
    for (double v : groups[g]) {
      pooled.push_back(v);
      group_of.push_back(g);
    }
  }
  if (pooled.size() < 5) throw DataError("kruskal_wallis: need at least 5 observations");

  double tie_term = 0.0;
  const auto ranks = average_ranks(pooled, &tie_term);
  std::vector<double> rank_sums(groups.size(), 0.0);
  for (std::size_t i = 0; i < ranks.size(); ++i) rank_sums[group_of[i]] += ranks[i];

  const double n = static_cast<double>(pooled.size());
  double acc = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    acc += rank_sums[g] * rank_sums[g] / static_cast<double>(groups[g].size());
  }
  const double correction = 1.0 - tie_term / (n * n * n - n);
  if (correction <= 0.0) return {0.0, 1.0};  // every value tied
  const double h = std::max(0.0, (12.0 / (n * (n + 1.0)) * acc - 3.0 * (n + 1.0)) / correction);
  const boost::math::chi_squared_distribution<double> chi2(static_cast<double>(groups.size() - 1));
  return {h, boost::math::cdf(boost::math::complement(chi2, h))};
}

}  // namespace normprobe::stats
