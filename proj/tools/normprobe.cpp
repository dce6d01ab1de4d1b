// normprobe: pool sentence embeddings, run ablation probing experiments and
// generate synthetic probing data.
//
//   normprobe pool  --config run.json
//   normprobe probe --config run.json [--seed N] [--workers N] [--format md|csv|json] [--dry-run]
//   normprobe synth --config spec.json [--output-dir DIR]

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "normprobe/cli/commands.hpp"
#include "normprobe/cli/config.hpp"
#include "normprobe/cli/io.hpp"
#include "normprobe/error.hpp"

namespace fs = std::filesystem;
using namespace normprobe;

namespace {

int report_error(std::string_view category, int code, const std::string& message) {
  const nlohmann::ordered_json rec = {
      {"error", {{"category", category}, {"exit_code", code}, {"message", message}}}};
  std::cerr << rec.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Norm/direction ablation probing for sentence embeddings"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> output_dir;
  std::string format = "md";
  bool dry_run = false;

  app.add_option("--config", config_path, "Run configuration (pool, probe) or synth spec (synth), JSON");
  app.add_option("--seed", seed, "Override the master seed (probe), pool seed (pool) or spec seed (synth)");
  app.add_option("--workers", workers, "Concurrent probe trainings")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "Results table format")->check(CLI::IsMember({"md", "csv", "json"}));
  app.add_option("--output-dir", output_dir,
                 std::string("Output directory (default: config value, then $") + cli::kOutputDirEnv + ")");
  app.add_flag("--dry-run", dry_run, "Validate the config and print the resolved plan");

  auto* pool = app.add_subcommand("pool", "Mean-pool word vectors into sentence embeddings");
  auto* probe = app.add_subcommand("probe", "Run the ablation experiment grid");
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with planted signal");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("config", 1, e.what());
  }

  std::setvbuf(stdout, nullptr, _IOLBF, 0);

  cli::CommandOptions opts;
  opts.seed = seed;
  opts.workers = workers;
  if (output_dir) opts.output_dir = fs::path(*output_dir);
  opts.format = *report::parse_format(format);
  opts.dry_run = dry_run;
  opts.progress = &std::cout;

  try {
    if (config_path.empty()) throw ConfigError("--config is required");
    if (synth->parsed()) {
      const fs::path spec_path(config_path);
      std::string text;
      try {
        text = cli::read_text_file(spec_path);
      } catch (const DataError& e) {
        throw ConfigError(e.what());
      }
      const auto doc = cli::parse_json_text(text, spec_path.string());
      auto spec = cli::parse_synth_spec(doc);
      fs::path dir = spec_path.parent_path();
      if (doc.contains("output_dir")) {
        const fs::path p(doc["output_dir"].get<std::string>());
        dir = p.is_absolute() ? p : dir / p;
      }
      cli::cmd_synth(spec, dir, opts);
    } else {
      const auto cfg = cli::load_run_config(config_path);
      if (pool->parsed()) {
        cli::cmd_pool(cfg, opts);
      } else if (probe->parsed()) {
        cli::cmd_probe(cfg, opts);
      }
    }
  } catch (const ConfigError& e) {
    return report_error("config", 1, e.what());
  } catch (const DataError& e) {
    return report_error("data", 2, e.what());
  } catch (const ComputeError& e) {
    return report_error("runtime", 3, e.what());
  } catch (const std::exception& e) {
    return report_error("runtime", 3, e.what());
  }
  return 0;
}
