#include "normprobe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "normprobe/error.hpp"
#include "normprobe/rng.hpp"

namespace normprobe::synth {
namespace {

std::vector<double> random_unit(std::size_t dim, SeededRng& rng) {
  std::vector<double> v(dim);
  double n = 0.0;
  do {
    for (double& x : v) x = rng.standard_normal();
    n = l2_norm(v);
  } while (n == 0.0);
  for (double& x : v) x /= n;
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<std::vector<double>> prototypes(const SynthSpec& spec, SeededRng& rng) {
  const double max_cos = std::cos(kMinPrototypeAngleDeg * std::numbers::pi / 180.0);
  std::vector<std::vector<double>> out;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    std::vector<double> best;
    double best_worst = 2.0;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      auto cand = random_unit(spec.dim, rng);
      double worst = -1.0;
      for (const auto& p : out) worst = std::max(worst, dot(cand, p));
      if (worst < best_worst) {
        best_worst = worst;
        best = std::move(cand);
      }
      if (best_worst <= max_cos) break;
    }
    out.push_back(std::move(best));
  }
  return out;
}

bool has_dim_signal(Placement p) { return p == Placement::dims_only || p == Placement::both; }
bool has_norm_signal(Placement p) { return p == Placement::norm_only || p == Placement::both; }

}  // namespace

std::string_view placement_name(Placement p) {
  switch (p) {
    case Placement::dims_only: return "dims_only";
    case Placement::norm_only: return "norm_only";
    case Placement::both: return "both";
    case Placement::none: return "none";
  }
  return "unknown";
}

std::optional<Placement> parse_placement(std::string_view name) {
  for (auto p : {Placement::dims_only, Placement::norm_only, Placement::both, Placement::none}) {
    if (placement_name(p) == name) return p;
  }
  return std::nullopt;
}

void SynthSpec::validate() const {
  if (n_train == 0) throw ConfigError("n_train: must be positive");
  if (n_test == 0) throw ConfigError("n_test: must be positive");
  if (dim == 0) throw ConfigError("dim: must be positive");
  if (n_classes < 2) throw ConfigError("n_classes: must be at least 2");
  if (n_train < n_classes || n_test < n_classes) {
    throw ConfigError("n_train/n_test: each split needs at least one example per class");
  }
  if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) {
    throw ConfigError("signal_strength: must lie in [0, 1]");
  }
  if (!(noise_sigma > 0.0)) throw ConfigError("noise_sigma: must be positive");
  if (!(common_weight >= 0.0)) throw ConfigError("common_weight: must be non-negative");
  if (!(norm_low > 0.0)) throw ConfigError("norm_low: must be positive");
  if (!(norm_high > norm_low)) throw ConfigError("norm_high: must exceed norm_low");
  if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("name: must be a non-empty file stem");
  }
}

std::vector<std::pair<double, double>> norm_bands(const SynthSpec& spec) {
  const double width = (spec.norm_high - spec.norm_low) / static_cast<double>(spec.n_classes);
  const double mid = 0.5 * (spec.norm_low + spec.norm_high);
  const double half = 0.4 * width;
  std::vector<std::pair<double, double>> bands;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    const double slot_center = spec.norm_low + (static_cast<double>(c) + 0.5) * width;
    const double center = mid + spec.signal_strength * (slot_center - mid);
    bands.emplace_back(center - half, center + half);
  }
  return bands;
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_train + spec.n_test;

  // Balanced labels, shuffled within each split.
  std::vector<LabelId> labels(n);
  {
    SeededRng rng(derive_seed(spec.seed, "labels"));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t local = i < spec.n_train ? i : i - spec.n_train;
      labels[i] = static_cast<LabelId>(local % spec.n_classes);
    }
    std::shuffle(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(spec.n_train), rng.engine());
    std::shuffle(labels.begin() + static_cast<std::ptrdiff_t>(spec.n_train), labels.end(), rng.engine());
  }

  SeededRng proto_rng(derive_seed(spec.seed, "prototypes"));
  const auto protos = prototypes(spec, proto_rng);
  const auto bands = norm_bands(spec);
  SeededRng common_rng(derive_seed(spec.seed, "common"));
  const auto common = random_unit(spec.dim, common_rng);

  std::string tsv;
  embed::SentenceEmbeddingSet all{spec.dim, {}, "synthetic:" + std::string(placement_name(spec.placement))};
  all.vectors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SeededRng rng(derive_seed(spec.seed, "example", i));
    const LabelId y = labels[i];

    std::vector<double> direction;
    if (has_dim_signal(spec.placement)) {
      direction.resize(spec.dim);
      for (std::size_t k = 0; k < spec.dim; ++k) {
        direction[k] = spec.signal_strength * protos[y][k] + spec.noise_sigma * rng.standard_normal();
      }
      if (l2_norm(direction) == 0.0) direction = random_unit(spec.dim, rng);
    } else {
      direction = random_unit(spec.dim, rng);
    }
    for (std::size_t k = 0; k < spec.dim; ++k) direction[k] += spec.common_weight * common[k];
    if (l2_norm(direction) == 0.0) direction = random_unit(spec.dim, rng);

    const double target = has_norm_signal(spec.placement)
                              ? rng.uniform(bands[y].first, bands[y].second)
                              : rng.uniform(spec.norm_low, spec.norm_high);
    const double scale = target / l2_norm(direction);
    for (double& x : direction) x *= scale;
    all.vectors.emplace_back(std::move(direction));

    tsv += i < spec.n_train ? "tr\t" : "te\t";
    tsv += std::to_string(y);
    tsv += "\tsynthetic example ";
    tsv += std::to_string(i);
    tsv += '\n';
  }

  // Built through the parser so label ids match what a file round trip yields.
  auto dataset = corpus::parse_probing_text(tsv, spec.name);
  const auto& tr = dataset.indices(corpus::Partition::train);
  const auto& te = dataset.indices(corpus::Partition::test);
  auto train = all.subset(tr);
  auto test = all.subset(te);
  return SynthData{std::move(dataset), std::move(all), std::move(train), std::move(test)};
}

}  // namespace normprobe::synth
