#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "normprobe/ablate.hpp"
#include "normprobe/probe.hpp"
#include "normprobe/stats.hpp"
#include "normprobe/synth.hpp"
#include "normprobe/vector.hpp"

namespace normprobe::cli {

inline constexpr const char* kOutputDirEnv = "NORMPROBE_OUTPUT_DIR";
inline constexpr const char* kDefaultOutputDir = "normprobe-out";

struct TaskSource {
  std::string name;
  std::filesystem::path dataset;
  // Exactly one of these is set after parsing.
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> word_table;
};

// Explicit [min, max] or "auto" (pooled min/max over every task's vectors).
struct RangeSetting {
  std::optional<ablate::Range> fixed;
  bool is_auto() const { return !fixed.has_value(); }
};

struct RunConfig {
  std::string encoder;
  std::vector<TaskSource> tasks;
  std::filesystem::path output_dir;
  std::vector<std::string> conditions;
  RangeSetting norm_range;
  RangeSetting dim_range;
  NormOrder norm_order = NormOrder::l2;  // for unsuffixed ablation conditions
  std::size_t n_runs = 50;
  std::uint64_t master_seed = 0;
  std::uint64_t pool_seed = 0;
  probe::ProbeConfig probe;
  std::size_t workers = 1;
  stats::CiMethod ci_method = stats::CiMethod::student_t;
  std::optional<std::size_t> train_subsample;
  bool freeze_noise = false;
  bool freeze_probe_init = false;
  bool correlations = true;
};

// Relative paths resolve against base_dir. The output directory falls back
// to $NORMPROBE_OUTPUT_DIR, then to ./normprobe-out. Throws ConfigError.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Parses a synthetic-data spec document. Throws ConfigError naming the field.
synth::SynthSpec parse_synth_spec(const nlohmann::json& doc);

nlohmann::json parse_json_text(const std::string& text, const std::string& source);

}  // namespace normprobe::cli
