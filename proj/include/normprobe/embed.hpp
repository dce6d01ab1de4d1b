#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "normprobe/corpus.hpp"
#include "normprobe/rng.hpp"
#include "normprobe/vector.hpp"

namespace normprobe::embed {

// Static word vectors keyed by token. Also tracks the per-component extrema
// over every row read from the source file (including rows dropped by a
// vocabulary filter), which parameterize random OOV replacement vectors.
class WordEmbeddingTable {
 public:
  explicit WordEmbeddingTable(std::size_t dim);

  // Throws DataError on a dimension mismatch or a duplicate token.
  void add(std::string token, std::vector<double> values);
  // Widens the component ranges without storing a row.
  void observe(std::span<const double> values);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<double>* find(const std::string& token) const;

  std::span<const double> component_min() const noexcept { return component_min_; }
  std::span<const double> component_max() const noexcept { return component_max_; }

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<double>> entries_;
  std::vector<double> component_min_;
  std::vector<double> component_max_;
};

// Reads the whitespace-separated "<token> <v1> ... <vd>" text format; dim is
// inferred from the first line. When `vocabulary` is given, only those
// tokens are kept.
WordEmbeddingTable load_word_table(const std::filesystem::path& path,
                                   const std::unordered_set<std::string>* vocabulary = nullptr);
WordEmbeddingTable parse_word_table(std::istream& in,
                                    const std::unordered_set<std::string>* vocabulary = nullptr);

// Lowercase (ASCII) + whitespace split.
std::vector<std::string> tokenize(std::string_view sentence);

struct PoolCounts {
  std::size_t tokens = 0;
  std::size_t oov = 0;
};

// Mean of the sentence's token vectors. Each out-of-vocabulary occurrence is
// replaced by a fresh vector whose components are uniform within the
// table's per-component range. In-vocabulary sentences consume no rng.
EmbeddingVector pool_sentence(const WordEmbeddingTable& table, std::string_view sentence,
                              SeededRng& rng, PoolCounts* counts = nullptr);

// Sentence vectors aligned 1:1 with a dataset's examples.
struct SentenceEmbeddingSet {
  std::size_t dim = 0;
  std::vector<EmbeddingVector> vectors;
  std::string provenance;

  std::size_t size() const noexcept { return vectors.size(); }
  // Throws DataError unless every vector has length `dim`.
  void check_consistent() const;
  SentenceEmbeddingSet subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const SentenceEmbeddingSet&, const SentenceEmbeddingSet&) = default;
};

struct PooledDataset {
  SentenceEmbeddingSet set;
  PoolCounts counts;
  std::uint64_t seed = 0;
};

// Pools every example; example i draws OOV noise from derive_seed(seed, i).
PooledDataset pool_dataset(const WordEmbeddingTable& table, const corpus::ProbingDataset& ds,
                           std::uint64_t seed, std::string provenance);

// Interchange format:
//   dim=<d> count=<n> provenance=<tag>
//   <n lines of d space-separated decimals>
// Norms are recomputed on load.
SentenceEmbeddingSet load_sentence_embeddings(const std::filesystem::path& path,
                                              std::optional<std::size_t> expected_count = {});
SentenceEmbeddingSet parse_sentence_embeddings(std::istream& in,
                                               std::optional<std::size_t> expected_count = {});
void write_sentence_embeddings(std::ostream& out, const SentenceEmbeddingSet& set);

struct NormStats {
  double l1_min = 0.0;
  double l1_max = 0.0;
  double l2_min = 0.0;
  double l2_max = 0.0;
  // Extrema over all components of all vectors (one global pair).
  double dim_min = 0.0;
  double dim_max = 0.0;
};

NormStats norm_stats(const SentenceEmbeddingSet& set);
// Pooled extrema over several sets (e.g. all task datasets of one encoder).
NormStats norm_stats(std::span<const SentenceEmbeddingSet* const> sets);

}  // namespace normprobe::embed
