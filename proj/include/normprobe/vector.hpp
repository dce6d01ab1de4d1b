#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace normprobe {

enum class NormOrder { l1, l2 };

std::string_view norm_order_name(NormOrder order);

double l1_norm(std::span<const double> values);
double l2_norm(std::span<const double> values);
double norm(std::span<const double> values, NormOrder order);

// Fixed-length real vector with its L1 and L2 norms cached at construction.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t dim() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  double l1() const noexcept { return l1_; }
  double l2() const noexcept { return l2_; }
  double norm(NormOrder order) const noexcept { return order == NormOrder::l1 ? l1_ : l2_; }
  bool is_zero() const noexcept { return l1_ == 0.0; }

  friend bool operator==(const EmbeddingVector& a, const EmbeddingVector& b) {
    return a.values_ == b.values_;
  }

 private:
  std::vector<double> values_;
  double l1_ = 0.0;
  double l2_ = 0.0;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace normprobe
