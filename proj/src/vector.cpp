#include "normprobe/vector.hpp"

#include <cmath>
#include <stdexcept>

namespace normprobe {

std::string_view norm_order_name(NormOrder order) {
  return order == NormOrder::l1 ? "L1" : "L2";
}

double l1_norm(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += std::abs(v);
  return sum;
}

double l2_norm(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

double norm(std::span<const double> values, NormOrder order) {
  return order == NormOrder::l1 ? l1_norm(values) : l2_norm(values);
}

EmbeddingVector::EmbeddingVector(std::vector<double> values)
    : values_(std::move(values)), l1_(l1_norm(values_)), l2_(l2_norm(values_)) {}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("cosine: dimension mismatch");
  if (a.is_zero() || b.is_zero()) throw std::invalid_argument("cosine: zero vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a[i] * b[i];
  return dot / (a.l2() * b.l2());
}

}  // namespace normprobe
