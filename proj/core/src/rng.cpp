#include "latq/rng.hpp"

#include <cmath>
#include <numbers>

#include "latq/errors.hpp"

namespace latq {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

Rng Rng::substream(std::uint64_t stream) const {
  return Rng(splitmix64(seed_ + (stream + 1) * 0x9E3779B97F4A7C15ULL));
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  // Box-Muller without caching the second variate, so each call consumes a
  // fixed number of engine steps regardless of history.
  double u1 = uniform();
  double u2 = uniform();
  while (u1 == 0.0) u1 = uniform();  // avoid log(0)
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::sign() { return (next_u64() >> 63) ? 1 : -1; }

double Rng::angle() { return 2.0 * std::numbers::pi * uniform(); }

double Rng::student_t(double nu) {
  if (nu <= 0.0) throw ValidationError("student_t: dof must be positive");
  // t = z / sqrt(g / nu) with g ~ Gamma(nu/2, 2) drawn by Marsaglia-Tsang.
  double shape = 0.5 * nu;
  double boost = 1.0;
  if (shape < 1.0) {
    // Boost trick for shape < 1.
    double u = uniform();
    while (u == 0.0) u = uniform();
    boost = std::pow(u, 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double g = 0.0;
  for (;;) {
    double x = gaussian();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = uniform();
    while (u == 0.0) u = uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      g = d * v * boost;
      break;
    }
  }
  g *= 2.0;  // scale 2: chi-square with nu dof
  double z = gaussian();
  return z / std::sqrt(g / nu);
}

}  // namespace latq
