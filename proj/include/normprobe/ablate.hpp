#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "normprobe/embed.hpp"
#include "normprobe/rng.hpp"
#include "normprobe/vector.hpp"

namespace normprobe::ablate {

enum class AblationKind { vanilla, ablate_dims, ablate_norm, ablate_both, normalize, random_vector };

std::string_view kind_name(AblationKind kind);
std::optional<AblationKind> parse_kind(std::string_view name);

struct Range {
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const Range&, const Range&) = default;
};

// One vector transform plus its sampling ranges.
//
// norm_order selects the norm that ablate_dims preserves, that ablate_norm,
// ablate_both and random_vector scale to, and that normalize divides by.
struct AblationSpec {
  AblationKind kind = AblationKind::vanilla;
  NormOrder norm_order = NormOrder::l2;
  Range norm_range{1.0, 1.0};
  Range dim_range{-1.0, 1.0};

  // Throws ConfigError: norm_range.min > 0, min <= max for both ranges.
  void validate() const;

  friend bool operator==(const AblationSpec&, const AblationSpec&) = default;
};

// Bound on redraws of an all-zero random direction.
inline constexpr int kMaxResamples = 100;

// Replaces the components with uniform draws from dim_range, rescaled so the
// chosen norm equals the input's.
EmbeddingVector ablate_dimensions(const EmbeddingVector& v, const AblationSpec& spec, SeededRng& rng);
// Rescales v to a norm drawn uniformly from norm_range; direction unchanged.
EmbeddingVector ablate_norm(const EmbeddingVector& v, const AblationSpec& spec, SeededRng& rng);
// Dimension ablation followed by norm ablation. The output does not depend on v
// beyond its dimension.
EmbeddingVector ablate_both(const EmbeddingVector& v, const AblationSpec& spec, SeededRng& rng);
// Same draws as ablate_both, without an input vector.
EmbeddingVector random_vector(std::size_t dim, const AblationSpec& spec, SeededRng& rng);
EmbeddingVector normalize(const EmbeddingVector& v, const AblationSpec& spec);

// Dispatches on spec.kind. vanilla returns a copy.
EmbeddingVector apply(const EmbeddingVector& v, const AblationSpec& spec, SeededRng& rng);

// Element-wise apply; element i uses its own stream derive_seed(seed, i), so
// the result is independent of evaluation order.
embed::SentenceEmbeddingSet apply_condition(const embed::SentenceEmbeddingSet& set,
                                            const AblationSpec& spec, std::uint64_t seed);

}  // namespace normprobe::ablate
