#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "dqa/types.hpp"

namespace dqa {

// Stream identifiers used when deriving substreams from a scenario seed.
enum class Stream : std::uint64_t {
  kTopology = 1,
  kProfiles = 2,
  kUnknownSystem = 3,
  kInput = 4,
  kNoise = 5,
  kCovariance = 6,
};

std::uint64_t splitmix64(std::uint64_t& state);

// Hashes (seed, path...) into an independent 64-bit seed. The mapping is a
// pure function of its arguments, so a substream for (trial, node, stream)
// is the same no matter which worker asks for it or in what order.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Rng(derive_seed(seed, path));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the spare deviate is cached.
  double normal();

  // Circular complex Gaussian with E|z|^2 = variance.
  Complex complex_normal(double variance = 1.0);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dqa
