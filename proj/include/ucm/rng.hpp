#pragma once

#include <cstdint>
#include <cmath>
#include <cstddef>
#include <vector>

namespace ucm {

/// splitmix64 (Steele, Lea & Flood 2014; public-domain reference constants).
/// Chosen over std::mt19937_64 + std distributions because every draw here is
/// specified down to the bit, so seeded runs reproduce across standard
/// libraries and platforms. Streams are derived by jumping the counter, which
/// keeps trials, restarts and cells independent without shared state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in {0, ..., n-1} via 128-bit multiply-shift.
  std::size_t next_below(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  /// Independent stream keyed by (this generator's seed, indices...). Each
  /// index perturbs the state through one mixing round, so derive(s, i) and
  /// derive(s, j) differ for i != j.
  template <typename... Ix>
  static SplitMix64 derive(std::uint64_t seed, Ix... indices) {
    SplitMix64 rng(seed);
    std::uint64_t state = rng.next();
    ((state = SplitMix64(state + 0x9e3779b97f4a7c15ULL *
                                     (static_cast<std::uint64_t>(indices) + 1))
                  .next()),
     ...);
    return SplitMix64(state);
  }

 private:
  std::uint64_t state_;
};

/// Flat (uniform) draw from the probability simplex: normalized i.i.d.
/// Exp(1) variates.
inline std::vector<double> flat_simplex(SplitMix64& rng, std::size_t n) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& v : w) {
    v = -std::log(1.0 - rng.next_double());
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

/// Fisher-Yates shuffle.
template <typename T>
void shuffle(SplitMix64& rng, std::vector<T>& values) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[rng.next_below(i)]);
  }
}

}  // namespace ucm
