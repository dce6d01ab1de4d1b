#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace normprobe {

// Deterministic pseudorandom source. The engine is fixed to mt19937_64 for
// the whole artifact; the same seed always yields the same stream.
class SeededRng {
 public:
  using Engine = std::mt19937_64;

  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  Engine& engine() noexcept { return engine_; }

  // Uniform on [lo, hi). Returns lo when lo == hi.
  double uniform(double lo, double hi);
  double standard_normal();
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t seed_;
  Engine engine_;
};

// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Stable seed derivation. Independent of platform and execution order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) noexcept;
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index) noexcept;

}  // namespace normprobe
