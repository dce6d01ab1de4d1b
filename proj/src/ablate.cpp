#include "normprobe/ablate.hpp"

#include <cmath>

#include "normprobe/error.hpp"

namespace normprobe::ablate {
namespace {

std::vector<double> scaled(std::span<const double> values, double factor) {
  std::vector<double> out(values.begin(), values.end());
  for (double& x : out) x *= factor;
  return out;
}

// Uniform components from dim_range, redrawn while the chosen norm is zero.
std::vector<double> random_direction(std::size_t dim, const AblationSpec& spec, SeededRng& rng) {
  std::vector<double> values(dim);
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    for (double& x : values) x = rng.uniform(spec.dim_range.min, spec.dim_range.max);
    if (norm(values, spec.norm_order) > 0.0) return values;
  }
  throw ComputeError("random draw had zero norm after " + std::to_string(kMaxResamples) +
                     " attempts; dim_range [" + std::to_string(spec.dim_range.min) + ", " +
                     std::to_string(spec.dim_range.max) + "] is degenerate");
}

void require_kind(const AblationSpec& spec, AblationKind kind, const char* op) {
  if (spec.kind != kind) {
    throw ConfigError(std::string(op) + " called with spec kind " + std::string(kind_name(spec.kind)));
  }
}

void require_nonzero(const EmbeddingVector& v, const char* op) {
  if (v.is_zero()) throw ComputeError(std::string(op) + ": zero input vector");
}

EmbeddingVector random_with_norm(std::size_t dim, const AblationSpec& spec, SeededRng& rng) {
  auto values = random_direction(dim, spec, rng);
  const double target = rng.uniform(spec.norm_range.min, spec.norm_range.max);
  const double current = norm(values, spec.norm_order);
  return EmbeddingVector(scaled(values, target / current));
}

}  // namespace

std::string_view kind_name(AblationKind kind) {
  switch (kind) {
    case AblationKind::vanilla: return "vanilla";
    case AblationKind::ablate_dims: return "ablate_dims";
    case AblationKind::ablate_norm: return "ablate_norm";
    case AblationKind::ablate_both: return "ablate_both";
    case AblationKind::normalize: return "normalize";
    case AblationKind::random_vector: return "random_vector";
  }
  return "unknown";
}

std::optional<AblationKind> parse_kind(std::string_view name) {
  for (auto k : {AblationKind::vanilla, AblationKind::ablate_dims, AblationKind::ablate_norm,
                 AblationKind::ablate_both, AblationKind::normalize, AblationKind::random_vector}) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

void AblationSpec::validate() const {
  if (!(norm_range.min > 0.0)) throw ConfigError("norm_range.min must be > 0");
  if (!(norm_range.min <= norm_range.max)) throw ConfigError("norm_range.min must be <= norm_range.max");
  if (!(dim_range.min <= dim_range.max)) throw ConfigError("dim_range.min must be <= dim_range.max");
  if (!std::isfinite(norm_range.max) || !std::isfinite(dim_range.min) || !std::isfinite(dim_range.max)) {
    throw ConfigError("ablation ranges must be finite");
  }
}

EmbeddingVector ablate_dimensions(const EmbeddingVector& v, const AblationSpec& spec, SeededRng& rng) {
  require_kind(spec, AblationKind::ablate_dims, "ablate_dimensions");
  require_nonzero(v, "ablate_dimensions");
  auto values = random_direction(v.dim(), spec, rng);
  const double factor = v.norm(spec.norm_order) / norm(values, spec.norm_order);
  return EmbeddingVector(scaled(values, factor));
}

EmbeddingVector ablate_norm(const EmbeddingVector& v, const AblationSpec& spec, SeededRng& rng) {
  require_kind(spec, AblationKind::ablate_norm, "ablate_norm");
  require_nonzero(v, "ablate_norm");
  const double target = rng.uniform(spec.norm_range.min, spec.norm_range.max);
  return EmbeddingVector(scaled(v.values(), target / v.norm(spec.norm_order)));
}

EmbeddingVector ablate_both(const EmbeddingVector& v, const AblationSpec& spec, SeededRng& rng) {
  require_kind(spec, AblationKind::ablate_both, "ablate_both");
  return random_with_norm(v.dim(), spec, rng);
}

EmbeddingVector random_vector(std::size_t dim, const AblationSpec& spec, SeededRng& rng) {
  require_kind(spec, AblationKind::random_vector, "random_vector");
  return random_with_norm(dim, spec, rng);
}

EmbeddingVector normalize(const EmbeddingVector& v, const AblationSpec& spec) {
  require_kind(spec, AblationKind::normalize, "normalize");
  require_nonzero(v, "normalize");
  return EmbeddingVector(scaled(v.values(), 1.0 / v.norm(spec.norm_order)));
}

EmbeddingVector apply(const EmbeddingVector& v, const AblationSpec& spec, SeededRng& rng) {
  switch (spec.kind) {
    case AblationKind::vanilla: return v;
    case AblationKind::ablate_dims: return ablate_dimensions(v, spec, rng);
    case AblationKind::ablate_norm: return ablate_norm(v, spec, rng);
    case AblationKind::ablate_both: return ablate_both(v, spec, rng);
    case AblationKind::normalize: return normalize(v, spec);
    case AblationKind::random_vector: return random_vector(v.dim(), spec, rng);
  }
  throw ConfigError("unknown ablation kind");
}

embed::SentenceEmbeddingSet apply_condition(const embed::SentenceEmbeddingSet& set,
                                            const AblationSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.kind == AblationKind::vanilla) return set;
  embed::SentenceEmbeddingSet out{set.dim, {}, set.provenance};
  out.vectors.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    SeededRng rng(derive_seed(seed, i));
    try {
      out.vectors.push_back(apply(set.vectors[i], spec, rng));
    } catch (const ComputeError& e) {
      throw ComputeError("vector " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace normprobe::ablate
