#include "normprobe/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "normprobe/error.hpp"

namespace normprobe::experiment {
namespace {

struct Split {
  embed::SentenceEmbeddingSet train;
  embed::SentenceEmbeddingSet test;
  std::vector<LabelId> train_labels;
  std::vector<LabelId> test_labels;
  std::size_t n_classes = 0;
};

Split make_split(const ExperimentPlan& plan) {
  const auto& ds = *plan.task;
  std::vector<std::size_t> train_idx = ds.indices(corpus::Partition::train);
  if (plan.train_subsample && *plan.train_subsample < train_idx.size()) {
    SeededRng rng(derive_seed(plan.master_seed, "train_subsample"));
    std::shuffle(train_idx.begin(), train_idx.end(), rng.engine());
    train_idx.resize(*plan.train_subsample);
    std::sort(train_idx.begin(), train_idx.end());
  }
  const auto& test_idx = ds.indices(corpus::Partition::test);

  Split s;
  s.train = plan.embeddings->subset(train_idx);
  s.test = plan.embeddings->subset(test_idx);
  for (std::size_t i : train_idx) s.train_labels.push_back(ds.examples()[i].label_id);
  for (std::size_t i : test_idx) s.test_labels.push_back(ds.examples()[i].label_id);
  s.n_classes = ds.n_classes();
  return s;
}

// Rethrows the in-flight exception with a context prefix, keeping its category.
[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(context + e.what());
  } catch (const ParseError& e) {
    throw DataError(context + e.what());
  } catch (const DataError& e) {
    throw DataError(context + e.what());
  } catch (const ComputeError& e) {
    throw ComputeError(context + e.what());
  } catch (const std::exception& e) {
    throw ComputeError(context + e.what());
  }
}

stats::RunResult run_on_split(const ExperimentPlan& plan, const Split& split,
                              const Condition& condition, std::size_t run_index) {
  const RunSeeds seeds = run_seeds(plan, condition.id, run_index);
  stats::RunResult result{condition.id, run_index, seeds.run, 0.0};

  if (condition.mode == ConditionMode::random_prediction) {
    SeededRng rng(derive_seed(seeds.run, "prediction"));
    probe::Matrix scores(static_cast<Eigen::Index>(split.test.size()),
                         static_cast<Eigen::Index>(split.n_classes));
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      for (Eigen::Index c = 0; c < scores.cols(); ++c) scores(i, c) = rng.uniform(0.0, 1.0);
      const double total = scores.row(i).sum();
      if (total > 0.0) scores.row(i) /= total;
    }
    result.auc = stats::auc_roc(scores, split.test_labels);
    return result;
  }

  const auto train_set =
      ablate::apply_condition(split.train, condition.spec, derive_seed(seeds.noise, "train"));
  const auto test_set =
      ablate::apply_condition(split.test, condition.spec, derive_seed(seeds.noise, "test"));

  probe::ProbeConfig cfg = plan.probe;
  cfg.seed = seeds.probe;
  const auto trained = probe::train(probe::to_matrix(train_set), split.train_labels, split.n_classes, cfg);
  const auto scores = probe::predict_scores(trained, probe::to_matrix(test_set));
  result.auc = stats::auc_roc(scores, split.test_labels);
  return result;
}

bool is_integer_label(const std::string& s, double* value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return false;
  *value = static_cast<double>(v);
  return true;
}

const stats::ConditionSummary* find_summary(const std::vector<stats::ConditionSummary>& summaries,
                                            std::string_view id) {
  for (const auto& s : summaries) {
    if (s.condition_id == id) return &s;
  }
  return nullptr;
}

// Norms whose spread is at round-off level are treated as constant.
bool effectively_constant(std::span<const double> xs) {
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return (*hi - *lo) <= 1e-12 * std::max(std::abs(*hi), std::abs(*lo));
}

}  // namespace

Condition make_condition(std::string_view id, ablate::Range norm_range, ablate::Range dim_range) {
  Condition c;
  c.id = std::string(id);
  c.spec.norm_range = norm_range;
  c.spec.dim_range = dim_range;
  if (id == kRandomPrediction) {
    c.mode = ConditionMode::random_prediction;
    return c;
  }

  std::string_view base = id;
  std::optional<NormOrder> order;
  if (base.ends_with("_l1")) {
    order = NormOrder::l1;
    base.remove_suffix(3);
  } else if (base.ends_with("_l2")) {
    order = NormOrder::l2;
    base.remove_suffix(3);
  }
  const auto kind = ablate::parse_kind(base);
  const bool takes_order = kind && (*kind == ablate::AblationKind::ablate_dims ||
                                    *kind == ablate::AblationKind::ablate_norm ||
                                    *kind == ablate::AblationKind::ablate_both ||
                                    *kind == ablate::AblationKind::normalize);
  if (!kind || (order && !takes_order) || (*kind == ablate::AblationKind::normalize && !order)) {
    throw ConfigError("unknown condition '" + std::string(id) + "'");
  }
  c.spec.kind = *kind;
  c.spec.norm_order = order.value_or(NormOrder::l2);
  return c;
}

std::vector<std::string> default_condition_ids() {
  return {std::string(kVanilla),      std::string(kAblateNorm),   std::string(kAblateDims),
          std::string(kAblateBoth),   std::string(kRandomVector), std::string(kRandomPrediction)};
}

bool is_baseline(std::string_view id) {
  return id == kVanilla || id == kRandomVector || id == kRandomPrediction;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::same_as_random: return "same_as_random";
    case Verdict::same_as_vanilla: return "same_as_vanilla";
    case Verdict::distinct_from_both: return "distinct_from_both";
    case Verdict::same_as_both: return "same_as_both";
  }
  return "unknown";
}

void ExperimentPlan::validate() const {
  if (!task || !embeddings) throw ConfigError("plan needs a dataset and embeddings");
  if (n_runs < 2) throw ConfigError("n_runs must be at least 2");
  probe.validate();
  std::set<std::string_view> ids;
  for (const auto& c : conditions) {
    if (!ids.insert(c.id).second) throw ConfigError("duplicate condition '" + c.id + "'");
    if (c.mode == ConditionMode::probe) c.spec.validate();
  }
  for (auto anchor : {kVanilla, kRandomVector, kRandomPrediction}) {
    if (!ids.contains(anchor)) {
      throw ConfigError("conditions must include '" + std::string(anchor) + "'");
    }
  }
  if (embeddings->size() != task->size()) {
    throw DataError("embeddings have " + std::to_string(embeddings->size()) + " rows but task '" +
                    task->task_name() + "' has " + std::to_string(task->size()) + " examples");
  }
  embeddings->check_consistent();
  if (train_subsample && *train_subsample < 2) throw ConfigError("train_subsample must be at least 2");
}

const Condition& ExperimentPlan::condition(std::string_view id) const {
  for (const auto& c : conditions) {
    if (c.id == id) return c;
  }
  throw ConfigError("plan has no condition '" + std::string(id) + "'");
}

RunSeeds run_seeds(const ExperimentPlan& plan, std::string_view condition_id, std::size_t run_index) {
  RunSeeds s;
  s.run = derive_seed(plan.master_seed, condition_id, run_index);
  const std::uint64_t frozen = derive_seed(plan.master_seed, condition_id);
  s.noise = derive_seed(plan.freeze_noise ? frozen : s.run, "noise");
  s.probe = derive_seed(plan.freeze_probe_init ? frozen : s.run, "probe");
  return s;
}

stats::RunResult run_condition(const ExperimentPlan& plan, const Condition& condition,
                               std::size_t run_index) {
  plan.validate();
  if (run_index >= plan.n_runs) throw ConfigError("run_index out of range");
  const Split split = make_split(plan);
  try {
    return run_on_split(plan, split, condition, run_index);
  } catch (...) {
    rethrow_with_context("condition '" + condition.id + "' run " + std::to_string(run_index) + ": ");
  }
}

PlanResult run_plan(const ExperimentPlan& plan, const RunOptions& options) {
  plan.validate();
  const Split split = make_split(plan);
  const std::size_t n_jobs = plan.conditions.size() * plan.n_runs;

  std::vector<RunRecord> records(n_jobs);
  std::vector<std::exception_ptr> errors(n_jobs);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex callback_mutex;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t job = next.fetch_add(1);
      if (job >= n_jobs) break;
      const auto& condition = plan.conditions[job / plan.n_runs];
      const std::size_t run_index = job % plan.n_runs;
      try {
        const auto start = std::chrono::steady_clock::now();
        try {
          records[job].result = run_on_split(plan, split, condition, run_index);
        } catch (...) {
          rethrow_with_context("task '" + plan.task->task_name() + "' condition '" + condition.id +
                               "' run " + std::to_string(run_index) + ": ");
        }
        records[job].task = plan.task->task_name();
        records[job].wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (options.on_run) {
          std::lock_guard lock(callback_mutex);
          options.on_run(records[job]);
        }
      } catch (...) {
        errors[job] = std::current_exception();
        failed.store(true);
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(options.workers, n_jobs));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  // A failed run aborts its condition and the plan; report the first in job order.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  PlanResult out;
  out.runs = std::move(records);
  for (std::size_t c = 0; c < plan.conditions.size(); ++c) {
    std::vector<stats::RunResult> runs;
    for (std::size_t r = 0; r < plan.n_runs; ++r) runs.push_back(out.runs[c * plan.n_runs + r].result);
    out.summaries.push_back(stats::summarize(
        std::move(runs), plan.ci_method,
        derive_seed(plan.master_seed, plan.conditions[c].id + "/bootstrap")));
  }
  out.classifications = classify(out.summaries);
  return out;
}

std::vector<ConditionClassification> classify(const std::vector<stats::ConditionSummary>& summaries) {
  const auto* vanilla = find_summary(summaries, kVanilla);
  const auto* rand_vec = find_summary(summaries, kRandomVector);
  const auto* rand_pred = find_summary(summaries, kRandomPrediction);
  if (!vanilla || !rand_vec || !rand_pred) {
    throw ConfigError("classification needs vanilla, random_vector and random_prediction summaries");
  }
  std::vector<ConditionClassification> out;
  for (const auto& s : summaries) {
    const bool random = stats::same_distribution(s, *rand_vec) || stats::same_distribution(s, *rand_pred);
    const bool like_vanilla = stats::same_distribution(s, *vanilla);
    ConditionClassification c;
    c.condition_id = s.condition_id;
    if (random && like_vanilla) {
      c.verdict = Verdict::same_as_both;
    } else if (random) {
      c.verdict = Verdict::same_as_random;
    } else if (like_vanilla) {
      c.verdict = Verdict::same_as_vanilla;
    } else {
      c.verdict = Verdict::distinct_from_both;
    }
    c.above_random = !random && s.mean_auc > std::max(rand_vec->mean_auc, rand_pred->mean_auc);
    out.push_back(std::move(c));
  }
  return out;
}

bool infer_norm_encoding(const std::vector<ConditionClassification>& classifications) {
  const ConditionClassification* dims = nullptr;
  const ConditionClassification* both = nullptr;
  for (const auto& c : classifications) {
    if (c.condition_id == kAblateDims) dims = &c;
    if (c.condition_id == kAblateBoth) both = &c;
  }
  if (!dims || !both) throw ConfigError("norm-encoding inference needs ablate_dims and ablate_both");
  return dims->verdict == Verdict::distinct_from_both && dims->above_random &&
         both->verdict == Verdict::same_as_random;
}

std::vector<double> correlation_labels(const corpus::ProbingDataset& ds,
                                       std::span<const std::size_t> indices) {
  std::vector<double> numeric(ds.n_classes());
  bool all_numeric = ds.n_classes() > 2;
  for (std::size_t c = 0; all_numeric && c < ds.n_classes(); ++c) {
    all_numeric = is_integer_label(ds.label_names()[c], &numeric[c]);
  }
  std::vector<double> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    const LabelId y = ds.examples()[i].label_id;
    out.push_back(all_numeric ? numeric[y] : static_cast<double>(y));
  }
  return out;
}

std::vector<stats::CorrelationReport> correlate_norms(const corpus::ProbingDataset& ds,
                                                      const embed::SentenceEmbeddingSet& set,
                                                      ablate::Range norm_range, std::uint64_t seed,
                                                      corpus::Partition partition) {
  if (set.size() != ds.size()) throw DataError("embeddings are not aligned with the dataset");
  const auto& idx = ds.indices(partition);
  if (idx.empty()) throw DataError("partition is empty");
  const auto labels = correlation_labels(ds, idx);
  const auto base = set.subset(idx);

  struct Transform {
    const char* name;
    ablate::AblationSpec spec;
  };
  const Transform transforms[] = {
      {"vanilla", {ablate::AblationKind::vanilla, NormOrder::l2, norm_range, {-1.0, 1.0}}},
      {"normalize_l1", {ablate::AblationKind::normalize, NormOrder::l1, norm_range, {-1.0, 1.0}}},
      {"normalize_l2", {ablate::AblationKind::normalize, NormOrder::l2, norm_range, {-1.0, 1.0}}},
      {"ablate_norm", {ablate::AblationKind::ablate_norm, NormOrder::l2, norm_range, {-1.0, 1.0}}},
  };

  std::vector<stats::CorrelationReport> out;
  for (const auto& t : transforms) {
    const auto transformed = ablate::apply_condition(base, t.spec, derive_seed(seed, t.name));
    std::vector<double> l1;
    std::vector<double> l2;
    for (const auto& v : transformed.vectors) {
      l1.push_back(v.l1());
      l2.push_back(v.l2());
    }
    stats::CorrelationReport r;
    r.task = ds.task_name();
    r.transform = t.name;
    r.n = idx.size();
    r.pearson_l1 = effectively_constant(l1) ? 0.0 : stats::pearson(labels, l1);
    r.pearson_l2 = effectively_constant(l2) ? 0.0 : stats::pearson(labels, l2);
    if (ds.n_classes() > 2) {
      std::vector<std::vector<double>> g1(ds.n_classes());
      std::vector<std::vector<double>> g2(ds.n_classes());
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const LabelId y = ds.examples()[idx[k]].label_id;
        g1[y].push_back(l1[k]);
        g2[y].push_back(l2[k]);
      }
      std::erase_if(g1, [](const auto& g) { return g.empty(); });
      std::erase_if(g2, [](const auto& g) { return g.empty(); });
      if (g1.size() >= 2 && idx.size() >= 5) {
        const stats::KruskalWallis flat{0.0, 1.0};
        const auto k1 = effectively_constant(l1) ? flat : stats::kruskal_wallis(g1);
        const auto k2 = effectively_constant(l2) ? flat : stats::kruskal_wallis(g2);
        r.kruskal_h_l1 = k1.h;
        r.kruskal_p_l1 = k1.p;
        r.kruskal_h_l2 = k2.h;
        r.kruskal_p_l2 = k2.p;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace normprobe::experiment
