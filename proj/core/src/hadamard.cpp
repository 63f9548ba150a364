#include "latq/hadamard.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>

#include "latq/errors.hpp"

namespace latq {
namespace {

std::int64_t pow_mod(std::int64_t a, std::int64_t e, std::int64_t q) {
  std::int64_t r = 1;
  a %= q;
  while (e > 0) {
    if (e & 1) r = r * a % q;
    a = a * a % q;
    e >>= 1;
  }
  return r;
}

// Legendre symbol chi(a) over GF(q): 0 if a == 0, +1 for squares, -1 else.
int legendre(std::int64_t a, std::int64_t q) {
  a %= q;
  if (a < 0) a += q;
  if (a == 0) return 0;
  return pow_mod(a, (q - 1) / 2, q) == 1 ? 1 : -1;
}

HadamardBase sylvester(std::size_t order) {
  HadamardBase b{order, std::vector<std::int8_t>(order * order)};
  for (std::size_t i = 0; i < order; ++i)
    for (std::size_t j = 0; j < order; ++j)
      b.entries[i * order + j] =
          std::popcount(i & j) % 2 == 0 ? std::int8_t{1} : std::int8_t{-1};
  return b;
}

// Order q+1 for prime q = 3 (mod 4): H = C + I where C is the skew
// conference matrix [[0, 1^T], [-1, Q]] built from the Jacobsthal matrix
// Q[a][b] = chi(a - b).
HadamardBase paley_type1(std::size_t prime) {
  const std::size_t n = prime + 1;
  HadamardBase b{n, std::vector<std::int8_t>(n * n)};
  auto at = [&](std::size_t i, std::size_t j) -> std::int8_t& {
    return b.entries[i * n + j];
  };
  at(0, 0) = 1;
  for (std::size_t j = 1; j < n; ++j) at(0, j) = 1;
  for (std::size_t i = 1; i < n; ++i) at(i, 0) = -1;
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 1; j < n; ++j) {
      const int chi = legendre(static_cast<std::int64_t>(i) -
                                   static_cast<std::int64_t>(j),
                               static_cast<std::int64_t>(prime));
      at(i, j) = static_cast<std::int8_t>(i == j ? 1 : chi);
    }
  return b;
}

// Order 2(q+1) for prime q = 1 (mod 4): from the symmetric conference
// matrix S = [[0, 1^T], [1, Q]], replace 0 -> [[1,-1],[-1,-1]],
// +1 -> [[1,1],[1,-1]], -1 -> -[[1,1],[1,-1]].
HadamardBase paley_type2(std::size_t prime) {
  const std::size_t m = prime + 1;
  const std::size_t n = 2 * m;
  std::vector<std::int8_t> s(m * m, 0);
  for (std::size_t j = 1; j < m; ++j) {
    s[j] = 1;
    s[j * m] = 1;
  }
  for (std::size_t i = 1; i < m; ++i)
    for (std::size_t j = 1; j < m; ++j)
      s[i * m + j] = static_cast<std::int8_t>(
          i == j ? 0
                 : legendre(static_cast<std::int64_t>(j) -
                                static_cast<std::int64_t>(i),
                            static_cast<std::int64_t>(prime)));
  HadamardBase b{n, std::vector<std::int8_t>(n * n)};
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      std::int8_t blk[2][2];
      if (s[i * m + j] == 0) {
        blk[0][0] = 1, blk[0][1] = -1, blk[1][0] = -1, blk[1][1] = -1;
      } else {
        const std::int8_t v = s[i * m + j];
        blk[0][0] = v, blk[0][1] = v, blk[1][0] = v;
        blk[1][1] = static_cast<std::int8_t>(-v);
      }
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c)
          b.entries[(2 * i + a) * n + (2 * j + c)] = blk[a][c];
    }
  return b;
}

void verify_base(const HadamardBase& b) {
  const std::size_t q = b.q;
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j) {
      std::int64_t dot = 0;
      for (std::size_t k = 0; k < q; ++k)
        dot += static_cast<std::int64_t>(b.entries[i * q + k]) *
               b.entries[j * q + k];
      const std::int64_t want = i == j ? static_cast<std::int64_t>(q) : 0;
      if (dot != want)
        throw NumericalError("hadamard base self-check failed at order " +
                             std::to_string(q));
    }
}

HadamardBase build_base(std::size_t q) {
  HadamardBase b;
  switch (q) {
    case 1:
      b = HadamardBase{1, {1}};
      break;
    case 4:
      b = sylvester(4);
      break;
    case 12:
      b = paley_type1(11);
      break;
    case 20:
      b = paley_type1(19);
      break;
    case 28:
      b = paley_type2(13);
      break;
    default:
      throw SizeError("hadamard_base: order " + std::to_string(q) +
                      " not in registry");
  }
  verify_base(b);
  return b;
}

}  // namespace

const std::vector<std::size_t>& hadamard_registry() {
  static const std::vector<std::size_t> orders{1, 4, 12, 20, 28};
  return orders;
}

const HadamardBase& hadamard_base(std::size_t q) {
  static std::map<std::size_t, HadamardBase> cache;
  static std::mutex mutex;
  std::scoped_lock lock(mutex);
  auto it = cache.find(q);
  if (it == cache.end()) it = cache.emplace(q, build_base(q)).first;
  return it->second;
}

HadamardSpec plan_hadamard(std::size_t n) {
  if (n == 0) throw SizeError("plan_hadamard: n must be positive");
  const auto& registry = hadamard_registry();
  // Largest power of two dividing n, reduced until the cofactor has a base.
  for (std::size_t p = std::size_t{1} << std::countr_zero(n); p >= 1; p >>= 1) {
    const std::size_t q = n / p;
    for (std::size_t order : registry)
      if (order == q) return HadamardSpec{n, p, q};
    if (p == 1) break;
  }
  throw SizeError("plan_hadamard: no power-of-two x base factorization for " +
                  std::to_string(n));
}

void had_apply(const HadamardSpec& spec, std::span<double> x, bool transpose) {
  const std::size_t n = spec.n, p = spec.p, q = spec.q;
  if (x.size() != n) throw SizeError("had_apply: vector length mismatch");
  // Unnormalized butterflies along the power-of-two axis (stride q).
  for (std::size_t len = 1; len < p; len <<= 1) {
    for (std::size_t i = 0; i < p; i += len << 1) {
      for (std::size_t k = i; k < i + len; ++k) {
        double* a = x.data() + k * q;
        double* b = x.data() + (k + len) * q;
        for (std::size_t j = 0; j < q; ++j) {
          const double u = a[j];
          const double v = b[j];
          a[j] = u + v;
          b[j] = u - v;
        }
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  if (q == 1) {
    for (double& v : x) v *= scale;
    return;
  }
  // Dense +/-1 base along each contiguous q-row, fused with normalization.
  const HadamardBase& base = hadamard_base(q);
  std::vector<double> tmp(q);
  for (std::size_t r = 0; r < p; ++r) {
    double* seg = x.data() + r * q;
    for (std::size_t a = 0; a < q; ++a) {
      double acc = 0.0;
      const std::int8_t* row = base.entries.data() + (transpose ? a : a * q);
      if (transpose) {
        for (std::size_t b = 0; b < q; ++b) acc += row[b * q] * seg[b];
      } else {
        for (std::size_t b = 0; b < q; ++b) acc += row[b] * seg[b];
      }
      tmp[a] = acc * scale;
    }
    std::copy(tmp.begin(), tmp.end(), seg);
  }
}

Eigen::MatrixXd dense_hadamard(const HadamardSpec& spec) {
  const std::size_t n = spec.n, p = spec.p, q = spec.q;
  const HadamardBase& base = hadamard_base(q);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::MatrixXd H(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = i / q, iq = i % q;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t jp = j / q, jq = j % q;
      const int syl = std::popcount(ip & jp) % 2 == 0 ? 1 : -1;
      H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          scale * syl * base.entries[iq * q + jq];
    }
  }
  return H;
}

}  // namespace latq
