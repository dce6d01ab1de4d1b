#include "normprobe/embed.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "normprobe/error.hpp"

namespace normprobe::embed {
namespace {

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    const std::size_t b = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    out.push_back(line.substr(b, i - b));
  }
  return out;
}

bool is_integer(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

WordEmbeddingTable::WordEmbeddingTable(std::size_t dim)
    : dim_(dim),
      component_min_(dim, std::numeric_limits<double>::infinity()),
      component_max_(dim, -std::numeric_limits<double>::infinity()) {
  if (dim == 0) throw DataError("word table dimension must be positive");
}

void WordEmbeddingTable::observe(std::span<const double> values) {
  if (values.size() != dim_) throw DataError("word vector has wrong dimension");
  for (std::size_t i = 0; i < dim_; ++i) {
    component_min_[i] = std::min(component_min_[i], values[i]);
    component_max_[i] = std::max(component_max_[i], values[i]);
  }
}

void WordEmbeddingTable::add(std::string token, std::vector<double> values) {
  if (values.size() != dim_) {
    throw DataError("word vector for '" + token + "' has dimension " +
                    std::to_string(values.size()) + ", expected " + std::to_string(dim_));
  }
  observe(values);
  if (entries_.contains(token)) throw DataError("duplicate token '" + token + "'");
  entries_.emplace(std::move(token), std::move(values));
}

const std::vector<double>* WordEmbeddingTable::find(const std::string& token) const {
  const auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

WordEmbeddingTable parse_word_table(std::istream& in,
                                    const std::unordered_set<std::string>* vocabulary) {
  std::optional<WordEmbeddingTable> table;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  std::unordered_set<std::string> filtered_seen;

  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    const auto fields = split_ws(line);
    if (fields.empty()) continue;

    if (!table) {
      // word2vec-style "<count> <dim>" header.
      if (fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) {
        dim = static_cast<std::size_t>(std::stoull(std::string(fields[1])));
        if (dim == 0) throw ParseError(line_no, "header declares dimension 0");
        table.emplace(dim);
        continue;
      }
      if (fields.size() < 2) throw ParseError(line_no, "expected a token followed by values");
      dim = fields.size() - 1;
      table.emplace(dim);
    }

    if (fields.size() < dim + 1) {
      throw ParseError(line_no, "expected " + std::to_string(dim) + " values, found " +
                                    std::to_string(fields.size() - 1));
    }
    // Tokens may themselves contain spaces; extra leading fields belong to the
    // token unless they look numeric, in which case the row is too long.
    const std::size_t token_fields = fields.size() - dim;
    std::string token(fields[0]);
    for (std::size_t k = 1; k < token_fields; ++k) {
      if (parse_double(fields[k])) {
        throw ParseError(line_no, "expected " + std::to_string(dim) + " values, found " +
                                      std::to_string(fields.size() - 1));
      }
      token += ' ';
      token += fields[k];
    }
    values.assign(dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto v = parse_double(fields[token_fields + k]);
      if (!v) {
        throw ParseError(line_no, "unparsable value '" + std::string(fields[token_fields + k]) + "'");
      }
      if (!std::isfinite(*v)) throw ParseError(line_no, "non-finite value");
      values[k] = *v;
    }
    try {
      if (vocabulary && !vocabulary->contains(token)) {
        table->observe(values);
        if (!filtered_seen.insert(token).second) throw DataError("duplicate token '" + token + "'");
      } else {
        table->add(std::move(token), values);
      }
    } catch (const DataError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!table) throw DataError("word table is empty");
  return std::move(*table);
}

WordEmbeddingTable load_word_table(const std::filesystem::path& path,
                                   const std::unordered_set<std::string>* vocabulary) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word table '" + path.string() + "'");
  try {
    return parse_word_table(in, vocabulary);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  }
}

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : sentence) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

EmbeddingVector pool_sentence(const WordEmbeddingTable& table, std::string_view sentence,
                              SeededRng& rng, PoolCounts* counts) {
  const auto tokens = tokenize(sentence);
  if (tokens.empty()) throw DataError("cannot pool an empty sentence");

  const std::size_t dim = table.dim();
  std::vector<double> sum(dim, 0.0);
  std::size_t oov = 0;
  const auto lo = table.component_min();
  const auto hi = table.component_max();
  for (const auto& tok : tokens) {
    if (const auto* vec = table.find(tok)) {
      for (std::size_t i = 0; i < dim; ++i) sum[i] += (*vec)[i];
    } else {
      ++oov;
      for (std::size_t i = 0; i < dim; ++i) sum[i] += rng.uniform(lo[i], hi[i]);
    }
  }
  const double n = static_cast<double>(tokens.size());
  for (double& v : sum) v /= n;
  if (counts) {
    counts->tokens += tokens.size();
    counts->oov += oov;
  }
  return EmbeddingVector(std::move(sum));
}

void SentenceEmbeddingSet::check_consistent() const {
  if (dim == 0) throw DataError("sentence embedding dimension must be positive");
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].dim() != dim) {
      throw DataError("sentence vector " + std::to_string(i) + " has dimension " +
                      std::to_string(vectors[i].dim()) + ", expected " + std::to_string(dim));
    }
  }
}

SentenceEmbeddingSet SentenceEmbeddingSet::subset(std::span<const std::size_t> indices) const {
  SentenceEmbeddingSet out{dim, {}, provenance};
  out.vectors.reserve(indices.size());
  for (std::size_t i : indices) out.vectors.push_back(vectors.at(i));
  return out;
}

PooledDataset pool_dataset(const WordEmbeddingTable& table, const corpus::ProbingDataset& ds,
                           std::uint64_t seed, std::string provenance) {
  PooledDataset out;
  out.seed = seed;
  out.set.dim = table.dim();
  out.set.provenance = std::move(provenance);
  out.set.vectors.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    SeededRng rng(derive_seed(seed, i));
    try {
      out.set.vectors.push_back(pool_sentence(table, ds.examples()[i].sentence, rng, &out.counts));
    } catch (const DataError& e) {
      throw DataError("example " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

SentenceEmbeddingSet parse_sentence_embeddings(std::istream& in,
                                               std::optional<std::size_t> expected_count) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("sentence embedding file is empty");
  strip_cr(header);

  // dim=<d> count=<n> provenance=<tag...>
  const auto fields = split_ws(header);
  std::optional<std::size_t> dim;
  std::optional<std::size_t> count;
  std::string provenance;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const auto f = fields[k];
    if (f.starts_with("dim=") && is_integer(f.substr(4))) {
      dim = std::stoull(std::string(f.substr(4)));
    } else if (f.starts_with("count=") && is_integer(f.substr(6))) {
      count = std::stoull(std::string(f.substr(6)));
    } else if (f.starts_with("provenance=")) {
      const auto at = header.find("provenance=");
      provenance = header.substr(at + 11);
      break;
    } else {
      throw ParseError(1, "malformed header field '" + std::string(f) + "'");
    }
  }
  if (!dim || !count) throw ParseError(1, "header must declare dim=<d> and count=<n>");
  if (*dim == 0) throw ParseError(1, "dim must be positive");
  if (expected_count && *expected_count != *count) {
    throw DataError("sentence embedding file has " + std::to_string(*count) + " rows, expected " +
                    std::to_string(*expected_count));
  }

  SentenceEmbeddingSet set;
  set.dim = *dim;
  set.provenance = std::move(provenance);
  set.vectors.reserve(*count);
  std::string line;
  std::vector<double> values;
  for (std::size_t row = 0; row < *count; ++row) {
    const std::size_t line_no = row + 2;
    if (!std::getline(in, line)) {
      throw ParseError(line_no, "file ends after " + std::to_string(row) + " of " +
                                    std::to_string(*count) + " rows");
    }
    strip_cr(line);
    const auto parts = split_ws(line);
    if (parts.size() != *dim) {
      throw ParseError(line_no, "row " + std::to_string(row) + " has " + std::to_string(parts.size()) +
                                    " values, expected " + std::to_string(*dim));
    }
    values.assign(*dim, 0.0);
    for (std::size_t k = 0; k < *dim; ++k) {
      std::optional<double> v = parse_double(parts[k]);
      if (!v) {
        // from_chars is case sensitive for nan/inf; the interchange spelling is not.
        std::string lower(parts[k]);
        for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        v = parse_double(lower);
      }
      if (!v) throw ParseError(line_no, "row " + std::to_string(row) + ": unparsable value '" +
                                            std::string(parts[k]) + "'");
      if (!std::isfinite(*v)) {
        throw ParseError(line_no, "row " + std::to_string(row) + ": non-finite value");
      }
      values[k] = *v;
    }
    set.vectors.emplace_back(values);
  }
  while (std::getline(in, line)) {
    strip_cr(line);
    if (!split_ws(line).empty()) throw DataError("more rows than declared count=" + std::to_string(*count));
  }
  return set;
}

SentenceEmbeddingSet load_sentence_embeddings(const std::filesystem::path& path,
                                              std::optional<std::size_t> expected_count) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sentence embedding file '" + path.string() + "'");
  try {
    return parse_sentence_embeddings(in, expected_count);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_sentence_embeddings(std::ostream& out, const SentenceEmbeddingSet& set) {
  set.check_consistent();
  out << "dim=" << set.dim << " count=" << set.size() << " provenance=" << set.provenance << '\n';
  char buf[64];
  for (const auto& v : set.vectors) {
    for (std::size_t i = 0; i < v.dim(); ++i) {
      // Shortest representation that round-trips exactly.
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v[i]);
      if (i) out.put(' ');
      out.write(buf, ptr - buf);
    }
    out.put('\n');
  }
}

NormStats norm_stats(std::span<const SentenceEmbeddingSet* const> sets) {
  NormStats s;
  bool any = false;
  for (const auto* set : sets) {
    for (const auto& v : set->vectors) {
      if (!any) {
        s.l1_min = s.l1_max = v.l1();
        s.l2_min = s.l2_max = v.l2();
        s.dim_min = s.dim_max = v.dim() ? v[0] : 0.0;
        any = true;
      }
      s.l1_min = std::min(s.l1_min, v.l1());
      s.l1_max = std::max(s.l1_max, v.l1());
      s.l2_min = std::min(s.l2_min, v.l2());
      s.l2_max = std::max(s.l2_max, v.l2());
      for (double x : v.values()) {
        s.dim_min = std::min(s.dim_min, x);
        s.dim_max = std::max(s.dim_max, x);
      }
    }
  }
  if (!any) throw DataError("norm_stats: no vectors");
  return s;
}

NormStats norm_stats(const SentenceEmbeddingSet& set) {
  const SentenceEmbeddingSet* one[] = {&set};
  return norm_stats(std::span<const SentenceEmbeddingSet* const>(one));
}

}  // namespace normprobe::embed
