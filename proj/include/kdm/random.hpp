#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace kdm {

/// SplitMix64 finaliser; used for seeding and seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Mixes a base seed with task coordinates (setting, trial, dataset, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
  return h;
}

/// Portable generator: std::mt19937_64 (its output sequence is fixed by
/// the standard) with our own variate transforms, since the standard
/// distributions are implementation-defined.
///   uniform(): top 53 bits scaled to [0, 1)
///   normal():  Box-Muller on (1 - u1, u2); both variates are used in turn
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();

  /// Uniform integer in [0, bound), rejection sampled.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace kdm
