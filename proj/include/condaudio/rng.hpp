#pragma once

#include <cstdint>
#include <string_view>

namespace condaudio {

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t mix64(std::uint64_t x);  // splitmix64 finalizer

// Deterministic PRNG on a splitmix64 core. <random> engines are avoided on
// purpose: distribution output is implementation-defined, and every byte this
// project emits has to be reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  // Derived generators keyed by name (and optional index). Derivation uses the
  // construction seed, never the current draw position.
  Rng stream(std::string_view name) const;
  Rng stream(std::string_view name, std::uint64_t index) const;

  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  double uniform_in(double lo, double hi);
  double normal();                       // standard normal, Box-Muller
  std::uint64_t below(std::uint64_t n);  // unbiased in [0, n)

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace condaudio
