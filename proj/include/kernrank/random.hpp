#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace kernrank {

/// splitmix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the substream `index` under `master`. Nested derivation
/// (derive(derive(s, a), b)) gives a tree of streams keyed by parameters.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Seeded random stream. Each thread owns its stream; the draw sequence is a
/// pure function of the seed.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double normal() { return normal_(engine_); }

  /// Exponential with the given rate, strictly positive.
  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

  Stream substream(std::uint64_t index) const { return Stream(derive_seed(seed_, index)); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uint64_t seed_;
};

}  // namespace kernrank
