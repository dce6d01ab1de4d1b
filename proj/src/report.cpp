#include "normprobe/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "normprobe/error.hpp"

namespace normprobe::report {
namespace {

using nlohmann::ordered_json;

std::string join_labels(const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(i) + "=" + labels[i];
  }
  return out;
}

std::string percent(double level) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g%%", level * 100.0);
  return buf;
}

const experiment::ConditionClassification* find_class(
    const std::vector<experiment::ConditionClassification>& cs, const std::string& id) {
  for (const auto& c : cs) {
    if (c.condition_id == id) return &c;
  }
  return nullptr;
}

std::string optional_fixed4(const std::optional<double>& v) { return v ? fixed4(*v) : ""; }

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::string_view format_extension(Format f) {
  switch (f) {
    case Format::markdown: return "md";
    case Format::csv: return "csv";
    case Format::json: return "json";
  }
  return "txt";
}

std::optional<Format> parse_format(std::string_view name) {
  if (name == "md" || name == "markdown") return Format::markdown;
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  return std::nullopt;
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  std::string s(buf);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

std::string_view shading_tag(experiment::Verdict v) {
  switch (v) {
    case experiment::Verdict::same_as_random: return "RANDOM";
    case experiment::Verdict::same_as_vanilla: return "VANILLA";
    case experiment::Verdict::distinct_from_both: return "DISTINCT";
    case experiment::Verdict::same_as_both: return "BOTH";
  }
  return "?";
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string render_results(const std::vector<stats::ConditionSummary>& summaries,
                           const std::vector<experiment::ConditionClassification>& classifications,
                           Format format, const TableMetadata& meta) {
  if (summaries.size() != classifications.size()) {
    throw ConfigError("results table: " + std::to_string(summaries.size()) + " summaries but " +
                      std::to_string(classifications.size()) + " classifications");
  }
  std::vector<const experiment::ConditionClassification*> cls;
  for (const auto& s : summaries) {
    const auto* c = find_class(classifications, s.condition_id);
    if (!c) throw ConfigError("results table: no classification for condition '" + s.condition_id + "'");
    cls.push_back(c);
  }

  std::ostringstream out;
  switch (format) {
    case Format::markdown: {
      out << "# Results: " << meta.task << " (" << meta.encoder << ")\n\n";
      out << "- runs per condition: " << meta.n_runs << "\n";
      out << "- confidence level: " << percent(meta.ci_level) << " ("
          << stats::ci_method_name(meta.ci_method) << ")\n";
      out << "- master seed: " << meta.master_seed << "\n";
      out << "- provenance: " << meta.provenance << "\n";
      out << "- AUC mode: " << meta.auc_mode << "\n";
      out << "- label order: " << join_labels(meta.label_order) << "\n";
      if (meta.norm_encoding) {
        out << "- norm encodes task information: " << (*meta.norm_encoding ? "yes" : "no") << "\n";
      }
      out << "\n| condition | auc | ± CI | tag |\n|---|---:|---:|---|\n";
      for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        out << "| " << s.condition_id << " | " << fixed4(s.mean_auc) << " | "
            << fixed4(s.ci_half_width) << " | " << shading_tag(cls[i]->verdict) << " |\n";
      }
      break;
    }
    case Format::csv: {
      out << "task,encoder,condition,n_runs,mean_auc,ci_half_width,tag\r\n";
      for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        out << csv_field(meta.task) << ',' << csv_field(meta.encoder) << ',' << csv_field(s.condition_id)
            << ',' << s.n_runs << ',' << fixed4(s.mean_auc) << ',' << fixed4(s.ci_half_width) << ','
            << shading_tag(cls[i]->verdict) << "\r\n";
      }
      break;
    }
    case Format::json: {
      ordered_json doc;
      doc["metadata"] = {
          {"task", meta.task},
          {"encoder", meta.encoder},
          {"provenance", meta.provenance},
          {"n_runs", meta.n_runs},
          {"ci_level", meta.ci_level},
          {"ci_method", stats::ci_method_name(meta.ci_method)},
          {"master_seed", meta.master_seed},
          {"auc_mode", meta.auc_mode},
          {"label_order", meta.label_order},
      };
      ordered_json rows = ordered_json::array();
      for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        rows.push_back({
            {"condition", s.condition_id},
            {"n_runs", s.n_runs},
            {"mean_auc", s.mean_auc},
            {"mean_auc_display", fixed4(s.mean_auc)},
            {"ci_half_width", s.ci_half_width},
            {"ci_half_width_display", fixed4(s.ci_half_width)},
            {"verdict", experiment::verdict_name(cls[i]->verdict)},
            {"tag", shading_tag(cls[i]->verdict)},
            {"above_random", cls[i]->above_random},
        });
      }
      doc["conditions"] = std::move(rows);
      doc["infer_norm_encoding"] = meta.norm_encoding ? ordered_json(*meta.norm_encoding) : ordered_json(nullptr);
      out << doc.dump(2) << "\n";
      break;
    }
  }
  return out.str();
}

std::string render_correlations(const std::vector<stats::CorrelationReport>& reports, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::markdown: {
      out << "| task | vectors | L1 | L2 | KW H (L1) | KW p (L1) | KW H (L2) | KW p (L2) | n |\n";
      out << "|---|---|---:|---:|---:|---:|---:|---:|---:|\n";
      for (const auto& r : reports) {
        out << "| " << r.task << " | " << r.transform << " | " << fixed4(r.pearson_l1) << " | "
            << fixed4(r.pearson_l2) << " | " << optional_fixed4(r.kruskal_h_l1) << " | "
            << optional_fixed4(r.kruskal_p_l1) << " | " << optional_fixed4(r.kruskal_h_l2) << " | "
            << optional_fixed4(r.kruskal_p_l2) << " | " << r.n << " |\n";
      }
      break;
    }
    case Format::csv: {
      out << "task,vectors,pearson_l1,pearson_l2,kruskal_h_l1,kruskal_p_l1,kruskal_h_l2,kruskal_p_l2,n\r\n";
      for (const auto& r : reports) {
        out << csv_field(r.task) << ',' << csv_field(r.transform) << ',' << fixed4(r.pearson_l1) << ','
            << fixed4(r.pearson_l2) << ',' << optional_fixed4(r.kruskal_h_l1) << ','
            << optional_fixed4(r.kruskal_p_l1) << ',' << optional_fixed4(r.kruskal_h_l2) << ','
            << optional_fixed4(r.kruskal_p_l2) << ',' << r.n << "\r\n";
      }
      break;
    }
    case Format::json: {
      ordered_json rows = ordered_json::array();
      for (const auto& r : reports) {
        rows.push_back({
            {"task", r.task},
            {"vectors", r.transform},
            {"pearson_l1", r.pearson_l1},
            {"pearson_l1_display", fixed4(r.pearson_l1)},
            {"pearson_l2", r.pearson_l2},
            {"pearson_l2_display", fixed4(r.pearson_l2)},
            {"kruskal_h_l1", optional_number(r.kruskal_h_l1)},
            {"kruskal_p_l1", optional_number(r.kruskal_p_l1)},
            {"kruskal_h_l2", optional_number(r.kruskal_h_l2)},
            {"kruskal_p_l2", optional_number(r.kruskal_p_l2)},
            {"n", r.n},
        });
      }
      out << ordered_json{{"correlations", std::move(rows)}}.dump(2) << "\n";
      break;
    }
  }
  return out.str();
}

std::string render_ledger(const std::vector<experiment::RunRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    const ordered_json rec = {
        {"task", r.task},
        {"condition", r.result.condition_id},
        {"run_index", r.result.run_index},
        {"seed", r.result.seed},
        {"auc", r.result.auc},
    };
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::string render_timings(const std::vector<experiment::RunRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    const ordered_json rec = {
        {"task", r.task},
        {"condition", r.result.condition_id},
        {"run_index", r.result.run_index},
        {"wall_seconds", r.wall_seconds},
    };
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::string output_file_name(std::string_view task, std::string_view encoder, std::string_view kind,
                             std::string_view extension) {
  std::string out(task);
  out += "__";
  out += encoder;
  out += "__";
  out += kind;
  out += '.';
  out += extension;
  return out;
}

}  // namespace normprobe::report
