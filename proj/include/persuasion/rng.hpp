#pragma once

#include <cstdint>
#include <span>

namespace persuasion {

// Platform-independent generator: xoshiro256** seeded through splitmix64.
// The standard <random> distributions are implementation-defined, so all
// draws that must reproduce bit-for-bit go through this class.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Seed for an independent stream identified by (seed, stream).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);
  bool bernoulli(double p) { return uniform() < p; }
  /// Index drawn from unnormalised non-negative weights.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::uint64_t s_[4];
};

}  // namespace persuasion
