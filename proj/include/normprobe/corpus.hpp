#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace normprobe {

using LabelId = std::uint32_t;

namespace corpus {

enum class Partition { train, dev, test };

// Partition codes used in the tab-separated task files: tr, va, te.
std::string_view partition_code(Partition p);
std::string_view partition_name(Partition p);

struct ProbingExample {
  Partition partition = Partition::train;
  LabelId label_id = 0;
  std::string raw_label;
  std::string sentence;

  friend bool operator==(const ProbingExample&, const ProbingExample&) = default;
};

// Labeled sentences for one probing task. Immutable once constructed; the
// constructor enforces the dataset invariants and throws DataError.
//
// The dev partition may be empty (several published task files and most
// synthetic sets carry only train and test); train and test may not.
class ProbingDataset {
 public:
  ProbingDataset(std::string task_name, std::vector<ProbingExample> examples,
                 std::vector<std::string> label_names);

  const std::string& task_name() const noexcept { return task_name_; }
  const std::vector<ProbingExample>& examples() const noexcept { return examples_; }
  const std::vector<std::string>& label_names() const noexcept { return label_names_; }
  std::size_t n_classes() const noexcept { return label_names_.size(); }
  std::size_t size() const noexcept { return examples_.size(); }

  // Example indices of one partition, in file order.
  const std::vector<std::size_t>& indices(Partition p) const;
  std::vector<LabelId> labels(Partition p) const;

  friend bool operator==(const ProbingDataset& a, const ProbingDataset& b) {
    return a.task_name_ == b.task_name_ && a.examples_ == b.examples_ &&
           a.label_names_ == b.label_names_;
  }

 private:
  std::string task_name_;
  std::vector<ProbingExample> examples_;
  std::vector<std::string> label_names_;
  std::vector<std::size_t> partition_indices_[3];
};

// Parses a probing task file: one "<tr|va|te>\t<label>\t<sentence>" record
// per line, UTF-8, LF or CRLF. Labels are encoded by first appearance.
// The task name defaults to the file stem.
ProbingDataset parse_probing_file(const std::filesystem::path& path);
ProbingDataset parse_probing_text(std::string_view text, std::string task_name);

// Inverse of parse_probing_text (LF line endings).
std::string to_tsv(const ProbingDataset& ds);

// Per-label counts for one partition, ordered by label_id. Labels absent
// from the partition are reported with count 0.
std::vector<std::pair<LabelId, std::size_t>> class_distribution(const ProbingDataset& ds,
                                                                Partition p);

bool is_valid_utf8(std::string_view bytes);

}  // namespace corpus
}  // namespace normprobe
