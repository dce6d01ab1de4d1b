#include "normprobe/cli/config.hpp"

#include <cstdlib>
#include <set>

#include "normprobe/cli/io.hpp"
#include "normprobe/cli/schema.hpp"
#include "normprobe/error.hpp"
#include "normprobe/experiment.hpp"

namespace normprobe::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

RangeSetting parse_range(const json& v, const char* field) {
  RangeSetting r;
  if (v.is_string()) return r;
  const ablate::Range range{v[0].get<double>(), v[1].get<double>()};
  if (!(range.min <= range.max)) {
    throw ConfigError(std::string("ablation.") + field + ": min must not exceed max");
  }
  r.fixed = range;
  return r;
}

}  // namespace

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": invalid JSON: " + e.what());
  }
}

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  check_schema(doc, run_config_schema(), "config");

  RunConfig cfg;
  cfg.encoder = doc.at("encoder").get<std::string>();

  std::optional<fs::path> default_table;
  if (doc.contains("word_table")) default_table = resolve(base_dir, doc["word_table"].get<std::string>());

  std::set<std::string> names;
  for (const auto& t : doc.at("tasks")) {
    TaskSource task;
    task.name = t.at("name").get<std::string>();
    if (!names.insert(task.name).second) throw ConfigError("tasks: duplicate task name '" + task.name + "'");
    task.dataset = resolve(base_dir, t.at("dataset").get<std::string>());
    if (t.contains("embeddings") && t.contains("word_table")) {
      throw ConfigError("tasks." + task.name + ": specify either embeddings or word_table, not both");
    }
    if (t.contains("embeddings")) {
      task.embeddings = resolve(base_dir, t["embeddings"].get<std::string>());
    } else if (t.contains("word_table")) {
      task.word_table = resolve(base_dir, t["word_table"].get<std::string>());
    } else if (default_table) {
      task.word_table = default_table;
    } else {
      throw ConfigError("tasks." + task.name + ": no embedding source (embeddings or word_table)");
    }
    cfg.tasks.push_back(std::move(task));
  }

  if (doc.contains("output_dir")) {
    cfg.output_dir = resolve(base_dir, doc["output_dir"].get<std::string>());
  } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    cfg.output_dir = env;
  } else {
    cfg.output_dir = kDefaultOutputDir;
  }

  cfg.conditions = doc.contains("conditions") ? doc["conditions"].get<std::vector<std::string>>()
                                              : experiment::default_condition_ids();
  std::set<std::string> seen;
  for (const auto& id : cfg.conditions) {
    if (!seen.insert(id).second) throw ConfigError("conditions: duplicate condition '" + id + "'");
    experiment::make_condition(id, {1, 1}, {-1, 1});
  }
  for (auto anchor : {experiment::kVanilla, experiment::kRandomVector, experiment::kRandomPrediction}) {
    if (!seen.count(std::string(anchor))) {
      throw ConfigError("conditions: must include '" + std::string(anchor) + "'");
    }
  }

  if (doc.contains("ablation")) {
    const auto& a = doc["ablation"];
    if (a.contains("norm_range")) cfg.norm_range = parse_range(a["norm_range"], "norm_range");
    if (a.contains("dim_range")) cfg.dim_range = parse_range(a["dim_range"], "dim_range");
    if (a.contains("norm_order")) {
      cfg.norm_order = a["norm_order"].get<std::string>() == "l1" ? NormOrder::l1 : NormOrder::l2;
    }
  }
  if (cfg.norm_range.fixed && cfg.norm_range.fixed->min <= 0) {
    throw ConfigError("ablation.norm_range: norms must be positive");
  }

  cfg.n_runs = doc.value("n_runs", cfg.n_runs);
  cfg.master_seed = doc.value("master_seed", cfg.master_seed);
  cfg.pool_seed = doc.value("pool_seed", cfg.pool_seed);
  cfg.workers = doc.value("workers", cfg.workers);
  if (doc.contains("ci_method")) cfg.ci_method = *stats::parse_ci_method(doc["ci_method"].get<std::string>());
  if (doc.contains("train_subsample")) cfg.train_subsample = doc["train_subsample"].get<std::size_t>();
  cfg.freeze_noise = doc.value("freeze_noise", false);
  cfg.freeze_probe_init = doc.value("freeze_probe_init", false);
  cfg.correlations = doc.value("correlations", true);

  if (doc.contains("probe")) {
    const auto& p = doc["probe"];
    auto& pc = cfg.probe;
    pc.hidden_size = p.value("hidden_size", pc.hidden_size);
    pc.max_epochs = p.value("max_epochs", pc.max_epochs);
    pc.learning_rate = p.value("learning_rate", pc.learning_rate);
    pc.max_batch_size = p.value("max_batch_size", pc.max_batch_size);
    pc.beta1 = p.value("beta1", pc.beta1);
    pc.beta2 = p.value("beta2", pc.beta2);
    pc.epsilon = p.value("epsilon", pc.epsilon);
  }
  cfg.probe.validate();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(parse_json_text(text, path.string()), path.parent_path());
}

synth::SynthSpec parse_synth_spec(const json& doc) {
  check_schema(doc, synth_spec_schema(), "synth spec");
  synth::SynthSpec s;
  s.name = doc.value("name", s.name);
  s.placement = *synth::parse_placement(doc.at("placement").get<std::string>());
  s.n_train = doc.value("n_train", s.n_train);
  s.n_test = doc.value("n_test", s.n_test);
  s.dim = doc.value("dim", s.dim);
  s.n_classes = doc.value("n_classes", s.n_classes);
  s.signal_strength = doc.value("signal_strength", s.signal_strength);
  s.noise_sigma = doc.value("noise_sigma", s.noise_sigma);
  s.common_weight = doc.value("common_weight", s.common_weight);
  s.norm_low = doc.value("norm_low", s.norm_low);
  s.norm_high = doc.value("norm_high", s.norm_high);
  s.seed = doc.value("seed", s.seed);
  s.validate();
  return s;
}

}  // namespace normprobe::cli
