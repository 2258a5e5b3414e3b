#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace asep {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent stream per (root, trial) pair.
inline std::uint64_t trial_seed(std::uint64_t root, std::uint64_t trial) {
  return splitmix64(splitmix64(root) ^ splitmix64(trial + 0x632be59bd9b4e019ull));
}

/// mt19937_64 with platform-independent conversions to uniform and
/// exponential variates.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  bool bernoulli(double prob) { return prob >= 1.0 || uniform() < prob; }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace asep
