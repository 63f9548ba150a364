#pragma once

#include <cstdint>
#include <random>

namespace latq {

// Deterministic, platform-stable random stream.
//
// The engine is std::mt19937_64 (its raw output is pinned by the standard),
// but all value mappings are implemented here rather than with std::
// distributions, whose algorithms vary across standard libraries.  Every
// randomized component takes a seed and derives independent substreams, so
// reordering or parallelizing consumers never changes what each one draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent child stream; substream(i) == substream(i) for equal seeds.
  Rng substream(std::uint64_t stream) const;

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform();

  // Standard normal via Box-Muller; consumes two uniforms per call.
  double gaussian();

  // Fair +1 / -1.
  int sign();

  // Uniform angle in [0, 2*pi).
  double angle();

  // Student-t with `nu` degrees of freedom (Marsaglia-Tsang gamma sampler).
  double student_t(double nu);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// SplitMix64 step; used for seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace latq
