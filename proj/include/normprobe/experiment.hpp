#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "normprobe/ablate.hpp"
#include "normprobe/corpus.hpp"
#include "normprobe/embed.hpp"
#include "normprobe/probe.hpp"
#include "normprobe/stats.hpp"

namespace normprobe::experiment {

inline constexpr std::string_view kVanilla = "vanilla";
inline constexpr std::string_view kAblateNorm = "ablate_norm";
inline constexpr std::string_view kAblateDims = "ablate_dims";
inline constexpr std::string_view kAblateBoth = "ablate_both";
inline constexpr std::string_view kRandomVector = "random_vector";
inline constexpr std::string_view kRandomPrediction = "random_prediction";

enum class ConditionMode {
  probe,              // transform embeddings, train, score
  random_prediction,  // no training; uniformly random class scores on test
};

struct Condition {
  std::string id;
  ConditionMode mode = ConditionMode::probe;
  ablate::AblationSpec spec;
};

// Builds a condition from its id. Known ids: vanilla, ablate_norm,
// ablate_dims, ablate_both (each optionally suffixed _l1 or _l2; L2 when
// unsuffixed), normalize_l1, normalize_l2, random_vector, random_prediction.
// Throws ConfigError for anything else.
Condition make_condition(std::string_view id, ablate::Range norm_range, ablate::Range dim_range);

// vanilla, ablate_norm, ablate_dims, ablate_both, random_vector, random_prediction
std::vector<std::string> default_condition_ids();

bool is_baseline(std::string_view condition_id);

enum class Verdict { same_as_random, same_as_vanilla, distinct_from_both, same_as_both };

std::string_view verdict_name(Verdict v);

struct ConditionClassification {
  std::string condition_id;
  Verdict verdict = Verdict::distinct_from_both;
  // Mean above both random baselines' means and outside their intervals.
  bool above_random = false;
};

struct ExperimentPlan {
  const corpus::ProbingDataset* task = nullptr;
  const embed::SentenceEmbeddingSet* embeddings = nullptr;  // aligned with task examples
  std::vector<Condition> conditions;
  std::size_t n_runs = 50;
  std::uint64_t master_seed = 0;
  probe::ProbeConfig probe;
  stats::CiMethod ci_method = stats::CiMethod::student_t;
  // Reuse one noise realization (or one probe initialization) for every run.
  bool freeze_noise = false;
  bool freeze_probe_init = false;
  // Train on a fixed seeded subsample of the train partition.
  std::optional<std::size_t> train_subsample;

  // Throws ConfigError (missing anchors, duplicates, bad counts) or
  // DataError (embeddings not aligned with the dataset).
  void validate() const;
  const Condition& condition(std::string_view id) const;
};

struct RunSeeds {
  std::uint64_t run = 0;
  std::uint64_t noise = 0;
  std::uint64_t probe = 0;
};

// run = hash(master_seed, condition_id, run_index); noise and probe are
// disjoint sub-streams of it (or of hash(master_seed, condition_id) when frozen).
RunSeeds run_seeds(const ExperimentPlan& plan, std::string_view condition_id, std::size_t run_index);

struct RunRecord {
  std::string task;
  stats::RunResult result;
  double wall_seconds = 0.0;
};

// One seeded repetition: transform train and test embeddings with fresh
// noise, train a probe on train, score AUC on test.
stats::RunResult run_condition(const ExperimentPlan& plan, const Condition& condition,
                               std::size_t run_index);

struct RunOptions {
  std::size_t workers = 1;
  // Invoked once per finished run, serialized across workers.
  std::function<void(const RunRecord&)> on_run;
};

struct PlanResult {
  std::vector<RunRecord> runs;  // condition order, then run index
  std::vector<stats::ConditionSummary> summaries;
  std::vector<ConditionClassification> classifications;
};

PlanResult run_plan(const ExperimentPlan& plan, const RunOptions& options = {});

// Classifies every summary against the vanilla and both random anchors.
std::vector<ConditionClassification> classify(const std::vector<stats::ConditionSummary>& summaries);

// True iff ablate_dims stays above random (distinct_from_both) while
// ablate_both is same_as_random. Throws ConfigError when either is missing.
bool infer_norm_encoding(const std::vector<ConditionClassification>& classifications);

// Label values used for norm correlations: label_id for binary tasks and for
// non-numeric label names; the numeric label value otherwise.
std::vector<double> correlation_labels(const corpus::ProbingDataset& ds,
                                       std::span<const std::size_t> indices);

// Pearson (and Kruskal-Wallis for > 2 classes) between labels and the L1/L2
// norms of vanilla, L1-normalized, L2-normalized and norm-ablated (L2) vectors.
std::vector<stats::CorrelationReport> correlate_norms(const corpus::ProbingDataset& ds,
                                                      const embed::SentenceEmbeddingSet& set,
                                                      ablate::Range norm_range,
                                                      std::uint64_t seed,
                                                      corpus::Partition partition = corpus::Partition::test);

}  // namespace normprobe::experiment
