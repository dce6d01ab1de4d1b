#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "normprobe/corpus.hpp"
#include "normprobe/embed.hpp"

namespace normprobe::synth {

enum class Placement { dims_only, norm_only, both, none };

std::string_view placement_name(Placement p);
std::optional<Placement> parse_placement(std::string_view name);

// Synthetic embeddings with label information planted in a chosen container.
//
// Directions: dims_only/both use per-class unit prototypes scaled by
// signal_strength plus isotropic Gaussian noise (noise_sigma per component);
// norm_only/none use isotropic random directions.
// Every direction also carries a class-independent shared component of
// weight common_weight (unit direction fixed by the seed), mimicking the
// common mean direction of trained embeddings.
// Norms: norm_only/both draw from per-class bands inside [norm_low,
// norm_high] whose centers spread apart with signal_strength (disjoint at 1,
// identical at 0); dims_only/none draw uniformly from [norm_low, norm_high].
struct SynthSpec {
  std::size_t n_train = 4000;
  std::size_t n_test = 1000;
  std::size_t dim = 50;
  std::size_t n_classes = 2;
  Placement placement = Placement::none;
  double signal_strength = 1.0;
  double noise_sigma = 0.15;
  double common_weight = 2.0;
  double norm_low = 2.0;
  double norm_high = 8.0;
  std::uint64_t seed = 0;
  std::string name = "synthetic";

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct SynthData {
  corpus::ProbingDataset dataset;      // train examples first, then test
  embed::SentenceEmbeddingSet embeddings;  // aligned with dataset
  embed::SentenceEmbeddingSet train;
  embed::SentenceEmbeddingSet test;
};

SynthData generate(const SynthSpec& spec);

// Minimum pairwise angle enforced between class prototypes, in degrees
// (relaxed automatically when dim is too small to satisfy it).
inline constexpr double kMinPrototypeAngleDeg = 60.0;

// Per-class norm band [lo, hi] for the given spec.
std::vector<std::pair<double, double>> norm_bands(const SynthSpec& spec);

}  // namespace normprobe::synth
