#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fleetroll {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a base seed with a sequence of logical keys (step, taxi, scenario, ...).
/// Results depend only on the values, never on call order or thread.
inline constexpr std::uint64_t derive_seed(std::uint64_t base,
                                           std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream tags used when splitting an episode seed.
enum class Stream : std::uint64_t {
  Initial = 1,
  Arrivals = 2,
  Policy = 3,
  Lookahead = 4,
  CertaintyEquivalence = 5,
};

inline constexpr std::uint64_t stream_seed(std::uint64_t base, Stream s) noexcept {
  return derive_seed(base, {static_cast<std::uint64_t>(s)});
}

/// Seeded random stream. The mapping from engine output to doubles and
/// bounded integers is fixed here rather than left to <random> distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fleetroll
