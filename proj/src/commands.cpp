#include "normprobe/cli/commands.hpp"

#include <map>
#include <sstream>
#include <unordered_set>

#include "normprobe/cli/io.hpp"
#include "normprobe/error.hpp"
#include "normprobe/rng.hpp"

namespace normprobe::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void emit(const CommandOptions& opts, const ordered_json& record) {
  if (!opts.progress) return;
  *opts.progress << record.dump() << '\n';
  opts.progress->flush();
}

void check_file_name_part(const std::string& s, const char* what) {
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) throw ConfigError(std::string(what) + " '" + s + "': use only letters, digits, '_', '-' and '.'");
  }
}

void check_names(const RunConfig& cfg) {
  check_file_name_part(cfg.encoder, "encoder");
  for (const auto& t : cfg.tasks) check_file_name_part(t.name, "task name");
}

corpus::ProbingDataset load_dataset(const TaskSource& t) {
  auto ds = corpus::parse_probing_file(t.dataset);
  // Rename to the configured task name.
  return corpus::ProbingDataset(t.name, ds.examples(), ds.label_names());
}

std::string pool_provenance(const std::string& encoder, const fs::path& table) {
  return "mean-pool:" + encoder + ":" + table.filename().string();
}

std::string write_embeddings_text(const embed::SentenceEmbeddingSet& set) {
  std::ostringstream out;
  embed::write_sentence_embeddings(out, set);
  return out.str();
}

ordered_json range_json(ablate::Range r) { return ordered_json::array({r.min, r.max}); }

std::size_t effective_workers(const RunConfig& cfg, const CommandOptions& opts) {
  const std::size_t w = opts.workers.value_or(cfg.workers);
  if (w == 0) throw ConfigError("workers must be at least 1");
  return w;
}

}  // namespace

std::vector<LoadedTask> load_tasks(const RunConfig& cfg) {
  std::vector<corpus::ProbingDataset> datasets;
  datasets.reserve(cfg.tasks.size());
  for (const auto& t : cfg.tasks) datasets.push_back(load_dataset(t));

  // One pass over each word table, restricted to the tokens its tasks use.
  std::map<fs::path, std::unordered_set<std::string>> vocab;
  for (std::size_t i = 0; i < cfg.tasks.size(); ++i) {
    if (!cfg.tasks[i].word_table) continue;
    auto& v = vocab[*cfg.tasks[i].word_table];
    for (const auto& ex : datasets[i].examples()) {
      for (auto& tok : embed::tokenize(ex.sentence)) v.insert(std::move(tok));
    }
  }
  std::map<fs::path, embed::WordEmbeddingTable> tables;
  for (const auto& [path, v] : vocab) tables.emplace(path, embed::load_word_table(path, &v));

  std::vector<LoadedTask> out;
  for (std::size_t i = 0; i < cfg.tasks.size(); ++i) {
    const auto& t = cfg.tasks[i];
    if (t.embeddings) {
      auto set = embed::load_sentence_embeddings(*t.embeddings, datasets[i].size());
      out.push_back(LoadedTask{t.name, std::move(datasets[i]), std::move(set), std::nullopt, 0});
    } else {
      const std::uint64_t seed = derive_seed(cfg.pool_seed, std::string_view(t.name));
      auto pooled = embed::pool_dataset(tables.at(*t.word_table), datasets[i], seed,
                                        pool_provenance(cfg.encoder, *t.word_table));
      out.push_back(LoadedTask{t.name, std::move(datasets[i]), std::move(pooled.set), pooled.counts, seed});
    }
  }
  return out;
}

std::vector<experiment::Condition> resolve_conditions(const RunConfig& cfg, const std::vector<LoadedTask>& tasks) {
  ablate::Range l1_range{1, 1};
  ablate::Range l2_range{1, 1};
  ablate::Range dim_range{-1, 1};
  if (cfg.norm_range.is_auto() || cfg.dim_range.is_auto()) {
    std::vector<const embed::SentenceEmbeddingSet*> sets;
    for (const auto& t : tasks) sets.push_back(&t.embeddings);
    const auto ns = embed::norm_stats(sets);
    l1_range = {ns.l1_min, ns.l1_max};
    l2_range = {ns.l2_min, ns.l2_max};
    dim_range = {ns.dim_min, ns.dim_max};
  }
  if (cfg.norm_range.fixed) l1_range = l2_range = *cfg.norm_range.fixed;
  if (cfg.dim_range.fixed) dim_range = *cfg.dim_range.fixed;

  std::vector<experiment::Condition> out;
  for (const auto& id : cfg.conditions) {
    auto c = experiment::make_condition(id, l2_range, dim_range);
    const bool suffixed = id.ends_with("_l1") || id.ends_with("_l2");
    if (!suffixed && c.mode == experiment::ConditionMode::probe && c.spec.kind != ablate::AblationKind::vanilla &&
        c.spec.kind != ablate::AblationKind::random_vector) {
      c.spec.norm_order = cfg.norm_order;
    }
    c.spec.norm_range = c.spec.norm_order == NormOrder::l1 ? l1_range : l2_range;
    c.spec.validate();
    out.push_back(std::move(c));
  }
  return out;
}

ordered_json plan_description(const RunConfig& cfg, const std::vector<LoadedTask>& tasks,
                              const std::vector<experiment::Condition>& conditions) {
  ordered_json doc;
  doc["encoder"] = cfg.encoder;
  doc["output_dir"] = cfg.output_dir.string();
  ordered_json jt = ordered_json::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    const auto& src = cfg.tasks[i];
    jt.push_back({
        {"name", t.name},
        {"dataset", src.dataset.string()},
        {"source", src.embeddings ? "embeddings" : "word_table"},
        {"source_path", (src.embeddings ? *src.embeddings : *src.word_table).string()},
        {"examples", t.dataset.size()},
        {"train", t.dataset.indices(corpus::Partition::train).size()},
        {"dev", t.dataset.indices(corpus::Partition::dev).size()},
        {"test", t.dataset.indices(corpus::Partition::test).size()},
        {"classes", t.dataset.n_classes()},
        {"dim", t.embeddings.dim},
        {"provenance", t.embeddings.provenance},
    });
  }
  doc["tasks"] = std::move(jt);
  ordered_json jc = ordered_json::array();
  for (const auto& c : conditions) {
    ordered_json e = {{"id", c.id}};
    if (c.mode == experiment::ConditionMode::random_prediction) {
      e["mode"] = "random_prediction";
    } else {
      e["mode"] = "probe";
      e["kind"] = ablate::kind_name(c.spec.kind);
      e["norm_order"] = norm_order_name(c.spec.norm_order);
      e["norm_range"] = range_json(c.spec.norm_range);
      e["dim_range"] = range_json(c.spec.dim_range);
    }
    jc.push_back(std::move(e));
  }
  doc["conditions"] = std::move(jc);
  doc["n_runs"] = cfg.n_runs;
  doc["master_seed"] = cfg.master_seed;
  doc["pool_seed"] = cfg.pool_seed;
  doc["workers"] = cfg.workers;
  doc["ci_method"] = stats::ci_method_name(cfg.ci_method);
  doc["ci_level"] = stats::kConfidenceLevel;
  doc["train_subsample"] = cfg.train_subsample ? ordered_json(*cfg.train_subsample) : ordered_json(nullptr);
  doc["freeze_noise"] = cfg.freeze_noise;
  doc["freeze_probe_init"] = cfg.freeze_probe_init;
  doc["probe"] = {
      {"hidden_size", cfg.probe.hidden_size},     {"activation", "relu"},
      {"max_epochs", cfg.probe.max_epochs},       {"learning_rate", cfg.probe.learning_rate},
      {"max_batch_size", cfg.probe.max_batch_size}, {"beta1", cfg.probe.beta1},
      {"beta2", cfg.probe.beta2},                 {"epsilon", cfg.probe.epsilon},
  };
  return doc;
}

std::vector<fs::path> cmd_pool(RunConfig cfg, const CommandOptions& opts) {
  if (opts.seed) cfg.pool_seed = *opts.seed;
  if (opts.output_dir) cfg.output_dir = *opts.output_dir;
  check_names(cfg);
  for (const auto& t : cfg.tasks) {
    if (!t.word_table) throw ConfigError("pool: task '" + t.name + "' has no word_table");
  }
  if (opts.dry_run) {
    ordered_json plan = {{"command", "pool"}, {"encoder", cfg.encoder}, {"pool_seed", cfg.pool_seed},
                         {"output_dir", cfg.output_dir.string()}};
    ordered_json jt = ordered_json::array();
    for (const auto& t : cfg.tasks) {
      jt.push_back({{"name", t.name},
                    {"dataset", t.dataset.string()},
                    {"word_table", t.word_table->string()},
                    {"seed", derive_seed(cfg.pool_seed, std::string_view(t.name))}});
    }
    plan["tasks"] = std::move(jt);
    emit(opts, {{"event", "plan"}, {"plan", plan}});
    return {};
  }
  ensure_writable_dir(cfg.output_dir);

  const auto tasks = load_tasks(cfg);
  std::vector<fs::path> written;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    const std::string stem = t.name + "__" + cfg.encoder;
    const fs::path emb = cfg.output_dir / (stem + ".emb");
    const fs::path meta = cfg.output_dir / (stem + ".pool.json");
    write_file_atomic(emb, write_embeddings_text(t.embeddings));
    const ordered_json m = {
        {"task", t.name},
        {"encoder", cfg.encoder},
        {"dataset", cfg.tasks[i].dataset.string()},
        {"word_table", cfg.tasks[i].word_table->string()},
        {"embeddings", emb.filename().string()},
        {"provenance", t.embeddings.provenance},
        {"seed", t.pool_seed},
        {"count", t.embeddings.size()},
        {"dim", t.embeddings.dim},
        {"tokens", t.pool_counts->tokens},
        {"oov_tokens", t.pool_counts->oov},
    };
    write_file_atomic(meta, m.dump(2) + "\n");
    written.push_back(emb);
    written.push_back(meta);
    emit(opts, {{"event", "pooled"},
                {"task", t.name},
                {"path", emb.string()},
                {"count", t.embeddings.size()},
                {"oov_tokens", t.pool_counts->oov}});
  }
  return written;
}

std::vector<ProbeTaskOutput> cmd_probe(RunConfig cfg, const CommandOptions& opts) {
  if (opts.seed) cfg.master_seed = *opts.seed;
  if (opts.output_dir) cfg.output_dir = *opts.output_dir;
  cfg.workers = effective_workers(cfg, opts);
  check_names(cfg);
  if (!opts.dry_run) ensure_writable_dir(cfg.output_dir);

  const auto tasks = load_tasks(cfg);
  const auto conditions = resolve_conditions(cfg, tasks);

  std::vector<experiment::ExperimentPlan> plans;
  for (const auto& t : tasks) {
    experiment::ExperimentPlan plan;
    plan.task = &t.dataset;
    plan.embeddings = &t.embeddings;
    plan.conditions = conditions;
    plan.n_runs = cfg.n_runs;
    plan.master_seed = cfg.master_seed;
    plan.probe = cfg.probe;
    plan.ci_method = cfg.ci_method;
    plan.freeze_noise = cfg.freeze_noise;
    plan.freeze_probe_init = cfg.freeze_probe_init;
    plan.train_subsample = cfg.train_subsample;
    plan.validate();
    plans.push_back(std::move(plan));
  }

  if (opts.dry_run) {
    emit(opts, {{"event", "plan"}, {"plan", plan_description(cfg, tasks, conditions)}});
    return {};
  }

  const ablate::Range l2_range = [&] {
    for (const auto& c : conditions) {
      if (c.mode == experiment::ConditionMode::probe && c.spec.norm_order == NormOrder::l2 &&
          c.spec.kind != ablate::AblationKind::vanilla) {
        return c.spec.norm_range;
      }
    }
    if (cfg.norm_range.fixed) return *cfg.norm_range.fixed;
    std::vector<const embed::SentenceEmbeddingSet*> sets;
    for (const auto& t : tasks) sets.push_back(&t.embeddings);
    const auto ns = embed::norm_stats(sets);
    return ablate::Range{ns.l2_min, ns.l2_max};
  }();

  std::vector<ProbeTaskOutput> outputs;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    const auto& plan = plans[i];
    emit(opts, {{"event", "task_start"},
                {"task", t.name},
                {"conditions", conditions.size()},
                {"n_runs", cfg.n_runs},
                {"workers", cfg.workers}});

    experiment::RunOptions ro;
    ro.workers = cfg.workers;
    ro.on_run = [&](const experiment::RunRecord& r) {
      emit(opts, {{"event", "run"},
                  {"task", t.name},
                  {"condition", r.result.condition_id},
                  {"run_index", r.result.run_index},
                  {"auc", r.result.auc}});
    };
    ProbeTaskOutput out;
    out.task = t.name;
    out.result = experiment::run_plan(plan, ro);
    for (auto& r : out.result.runs) r.task = t.name;

    bool have_dims = false, have_both = false;
    for (const auto& c : conditions) {
      have_dims = have_dims || c.id == experiment::kAblateDims;
      have_both = have_both || c.id == experiment::kAblateBoth;
    }
    if (have_dims && have_both) out.norm_encoding = experiment::infer_norm_encoding(out.result.classifications);

    report::TableMetadata meta;
    meta.task = t.name;
    meta.encoder = cfg.encoder;
    meta.provenance = t.embeddings.provenance;
    meta.n_runs = cfg.n_runs;
    meta.ci_method = cfg.ci_method;
    meta.master_seed = cfg.master_seed;
    meta.label_order = t.dataset.label_names();
    meta.norm_encoding = out.norm_encoding;

    const auto file = [&](std::string_view kind, std::string_view ext) {
      return cfg.output_dir / report::output_file_name(t.name, cfg.encoder, kind, ext);
    };
    const auto put = [&](const fs::path& p, const std::string& content) {
      write_file_atomic(p, content);
      out.files.push_back(p);
      emit(opts, {{"event", "wrote"}, {"path", p.string()}});
    };

    put(file("ledger", "jsonl"), report::render_ledger(out.result.runs));
    put(file("timing", "jsonl"), report::render_timings(out.result.runs));
    put(file("results", report::format_extension(opts.format)),
        report::render_results(out.result.summaries, out.result.classifications, opts.format, meta));
    if (opts.format != report::Format::json) {
      put(file("results", "json"),
          report::render_results(out.result.summaries, out.result.classifications, report::Format::json, meta));
    }
    if (cfg.correlations) {
      out.correlations = experiment::correlate_norms(t.dataset, t.embeddings, l2_range,
                                                     derive_seed(cfg.master_seed, "correlations"));
      put(file("correlations", report::format_extension(opts.format)),
          report::render_correlations(out.correlations, opts.format));
    }

    for (std::size_t k = 0; k < out.result.summaries.size(); ++k) {
      const auto& s = out.result.summaries[k];
      emit(opts, {{"event", "summary"},
                  {"task", t.name},
                  {"condition", s.condition_id},
                  {"mean_auc", s.mean_auc},
                  {"ci_half_width", s.ci_half_width},
                  {"verdict", experiment::verdict_name(out.result.classifications[k].verdict)}});
    }
    if (out.norm_encoding) {
      emit(opts, {{"event", "inference"}, {"task", t.name}, {"infer_norm_encoding", *out.norm_encoding}});
    }
    outputs.push_back(std::move(out));
  }
  return outputs;
}

std::vector<fs::path> cmd_synth(synth::SynthSpec spec, const fs::path& output_dir, const CommandOptions& opts) {
  if (opts.seed) spec.seed = *opts.seed;
  spec.validate();
  check_file_name_part(spec.name, "name");
  const fs::path dir = opts.output_dir.value_or(output_dir.empty() ? fs::path(".") : output_dir);
  const fs::path tsv = dir / (spec.name + ".tsv");
  const fs::path emb = dir / (spec.name + ".emb");
  const fs::path config = dir / (spec.name + ".probe.json");
  if (opts.dry_run) {
    emit(opts, {{"event", "plan"},
                {"plan",
                 {{"command", "synth"},
                  {"name", spec.name},
                  {"placement", synth::placement_name(spec.placement)},
                  {"n_train", spec.n_train},
                  {"n_test", spec.n_test},
                  {"dim", spec.dim},
                  {"n_classes", spec.n_classes},
                  {"signal_strength", spec.signal_strength},
                  {"seed", spec.seed},
                  {"files", {tsv.string(), emb.string(), config.string()}}}}});
    return {};
  }
  ensure_writable_dir(dir);
  const auto data = synth::generate(spec);
  write_file_atomic(tsv, corpus::to_tsv(data.dataset));
  write_file_atomic(emb, write_embeddings_text(data.embeddings));
  const ordered_json probe_config = {
      {"encoder", "synth"},
      {"tasks", ordered_json::array({{{"name", spec.name},
                                      {"dataset", tsv.filename().string()},
                                      {"embeddings", emb.filename().string()}}})},
  };
  write_file_atomic(config, probe_config.dump(2) + "\n");
  for (const auto& p : {tsv, emb, config}) emit(opts, {{"event", "wrote"}, {"path", p.string()}});
  return {tsv, emb, config};
}

}  // namespace normprobe::cli
