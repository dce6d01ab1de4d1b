#include "normprobe/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "normprobe/error.hpp"

namespace normprobe::corpus {
namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::size_t partition_slot(Partition p) { return static_cast<std::size_t>(p); }

}  // namespace

std::string_view partition_code(Partition p) {
  switch (p) {
    case Partition::train: return "tr";
    case Partition::dev: return "va";
    case Partition::test: return "te";
  }
  return "??";
}

std::string_view partition_name(Partition p) {
  switch (p) {
    case Partition::train: return "train";
    case Partition::dev: return "dev";
    case Partition::test: return "test";
  }
  return "??";
}

bool is_valid_utf8(std::string_view bytes) {
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(bytes[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong encodings, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

ProbingDataset::ProbingDataset(std::string task_name, std::vector<ProbingExample> examples,
                               std::vector<std::string> label_names)
    : task_name_(std::move(task_name)),
      examples_(std::move(examples)),
      label_names_(std::move(label_names)) {
  if (label_names_.size() < 2) {
    throw DataError("task '" + task_name_ + "': need at least 2 classes, found " +
                    std::to_string(label_names_.size()));
  }
  std::unordered_map<std::string_view, std::size_t> seen;
  for (std::size_t i = 0; i < label_names_.size(); ++i) {
    if (!seen.emplace(label_names_[i], i).second) {
      throw DataError("task '" + task_name_ + "': duplicate label name '" + label_names_[i] + "'");
    }
  }
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& ex = examples_[i];
    if (ex.label_id >= label_names_.size()) {
      throw DataError("task '" + task_name_ + "': example " + std::to_string(i) +
                      " has label_id out of range");
    }
    if (trim(ex.sentence).empty()) {
      throw DataError("task '" + task_name_ + "': example " + std::to_string(i) +
                      " has an empty sentence");
    }
    partition_indices_[partition_slot(ex.partition)].push_back(i);
  }
  for (Partition p : {Partition::train, Partition::test}) {
    if (partition_indices_[partition_slot(p)].empty()) {
      throw DataError("task '" + task_name_ + "': " + std::string(partition_name(p)) +
                      " partition is empty");
    }
  }
}

const std::vector<std::size_t>& ProbingDataset::indices(Partition p) const {
  return partition_indices_[partition_slot(p)];
}

std::vector<LabelId> ProbingDataset::labels(Partition p) const {
  std::vector<LabelId> out;
  const auto& idx = indices(p);
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(examples_[i].label_id);
  return out;
}

ProbingDataset parse_probing_text(std::string_view text, std::string task_name) {
  if (text.empty()) throw DataError("task '" + task_name + "': empty file");

  std::vector<ProbingExample> examples;
  std::vector<std::string> label_names;
  std::unordered_map<std::string, LabelId> label_ids;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    auto eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!is_valid_utf8(line)) throw ParseError(line_no, "invalid UTF-8");

    std::string_view fields[3];
    std::size_t n_fields = 0;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      if (n_fields < 3) {
        fields[n_fields] = line.substr(start, tab == std::string_view::npos ? tab : tab - start);
      }
      ++n_fields;
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (n_fields != 3) {
      throw ParseError(line_no, "expected 3 tab-separated fields, found " + std::to_string(n_fields));
    }

    ProbingExample ex;
    if (fields[0] == "tr") {
      ex.partition = Partition::train;
    } else if (fields[0] == "va") {
      ex.partition = Partition::dev;
    } else if (fields[0] == "te") {
      ex.partition = Partition::test;
    } else {
      throw ParseError(line_no, "unknown partition code '" + std::string(fields[0]) + "'");
    }
    if (fields[1].empty()) throw ParseError(line_no, "empty label");
    if (trim(fields[2]).empty()) throw ParseError(line_no, "empty sentence");

    ex.raw_label = std::string(fields[1]);
    auto [it, inserted] = label_ids.emplace(ex.raw_label, static_cast<LabelId>(label_names.size()));
    if (inserted) label_names.push_back(ex.raw_label);
    ex.label_id = it->second;
    ex.sentence = std::string(fields[2]);
    examples.push_back(std::move(ex));
  }

  return ProbingDataset(std::move(task_name), std::move(examples), std::move(label_names));
}

ProbingDataset parse_probing_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_probing_text(buf.str(), path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  }
}

std::string to_tsv(const ProbingDataset& ds) {
  std::string out;
  for (const auto& ex : ds.examples()) {
    out += partition_code(ex.partition);
    out += '\t';
    out += ex.raw_label;
    out += '\t';
    out += ex.sentence;
    out += '\n';
  }
  return out;
}

std::vector<std::pair<LabelId, std::size_t>> class_distribution(const ProbingDataset& ds,
                                                                Partition p) {
  std::vector<std::pair<LabelId, std::size_t>> counts(ds.n_classes());
  for (std::size_t c = 0; c < counts.size(); ++c) counts[c] = {static_cast<LabelId>(c), 0};
  for (std::size_t i : ds.indices(p)) ++counts[ds.examples()[i].label_id].second;
  return counts;
}

}  // namespace normprobe::corpus
