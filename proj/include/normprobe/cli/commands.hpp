#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "normprobe/cli/config.hpp"
#include "normprobe/corpus.hpp"
#include "normprobe/embed.hpp"
#include "normprobe/experiment.hpp"
#include "normprobe/report.hpp"
#include "normprobe/synth.hpp"

namespace normprobe::cli {

struct CommandOptions {
  std::optional<std::uint64_t> seed;  // overrides the command's seed
  std::optional<std::size_t> workers;
  std::optional<std::filesystem::path> output_dir;
  report::Format format = report::Format::markdown;
  bool dry_run = false;
  std::ostream* progress = nullptr;  // one JSON record per line, flushed
};

struct LoadedTask {
  std::string name;
  corpus::ProbingDataset dataset;
  embed::SentenceEmbeddingSet embeddings;
  std::optional<embed::PoolCounts> pool_counts;
  std::uint64_t pool_seed = 0;
};

// Reads every task's dataset and embeddings, pooling from the word table
// where that is the task's source.
std::vector<LoadedTask> load_tasks(const RunConfig& cfg);

// Conditions with "auto" ranges resolved against the pooled norm statistics
// of all tasks.
std::vector<experiment::Condition> resolve_conditions(const RunConfig& cfg, const std::vector<LoadedTask>& tasks);

// Pools each task from its word table into <output_dir>/<task>__<encoder>.emb
// plus a .pool.json with the OOV count and seed. Returns written paths.
std::vector<std::filesystem::path> cmd_pool(RunConfig cfg, const CommandOptions& opts);

struct ProbeTaskOutput {
  std::string task;
  experiment::PlanResult result;
  std::optional<bool> norm_encoding;
  std::vector<stats::CorrelationReport> correlations;
  std::vector<std::filesystem::path> files;
};

// Runs the full condition x run grid for every task and writes the ledger,
// timing log, results tables and correlation report. With dry_run, prints
// the resolved plan and returns without training.
std::vector<ProbeTaskOutput> cmd_probe(RunConfig cfg, const CommandOptions& opts);

// Writes <name>.tsv, <name>.emb and a ready-to-run <name>.probe.json.
std::vector<std::filesystem::path> cmd_synth(synth::SynthSpec spec, const std::filesystem::path& output_dir,
                                             const CommandOptions& opts);

nlohmann::ordered_json plan_description(const RunConfig& cfg, const std::vector<LoadedTask>& tasks,
                                        const std::vector<experiment::Condition>& conditions);

}  // namespace normprobe::cli
