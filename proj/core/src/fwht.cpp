#include "latq/fwht.hpp"

#include <cmath>

#include "latq/errors.hpp"

namespace latq {

void fwht(std::span<double> x) {
  const std::size_t n = x.size();
  if (!is_pow2(n)) throw SizeError("fwht: size must be a power of two");
  for (std::size_t len = 1; len < n; len <<= 1) {
    for (std::size_t i = 0; i < n; i += len << 1) {
      for (std::size_t k = i; k < i + len; ++k) {
        const double a = x[k];
        const double b = x[k + len];
        x[k] = a + b;
        x[k + len] = a - b;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (double& v : x) v *= scale;
}

}  // namespace latq
