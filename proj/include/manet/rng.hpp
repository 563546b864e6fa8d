// Deterministic random streams.
//
// Generator: std::mt19937_64 (its output sequence is fixed by the C++
// standard). Reals are produced from the top 53 bits of each draw, so the
// stream of doubles is identical on every conforming platform; the library
// never uses std::*_distribution, whose algorithms are implementation
// defined.
//
// Sub-streams are seeded by splitmix64(seed ^ splitmix64(stream)), so adding
// a node does not perturb the draws seen by existing nodes.

#pragma once

#include <cstdint>
#include <random>

namespace manet {

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream derived from a run seed and a stream index.
  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

}  // namespace manet
