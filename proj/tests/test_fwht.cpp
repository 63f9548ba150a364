#include <doctest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "latq/errors.hpp"
#include "latq/fwht.hpp"
#include "latq/rng.hpp"

using latq::fwht;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  latq::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.gaussian();
  return v;
}

}  // namespace

TEST_CASE("trivial sizes") {
  std::vector<double> one = {3.5};
  fwht(one);
  CHECK(one[0] == 3.5);

  std::vector<double> two = {1.0, 2.0};
  fwht(two);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(two[0] == doctest::Approx(3.0 * r));
  CHECK(two[1] == doctest::Approx(-1.0 * r));
}

TEST_CASE("matches the dense +-1 matrix at n = 8") {
  const std::size_t n = 8;
  const std::vector<double> v = random_vec(n, 3);
  std::vector<double> got = v;
  fwht(got);
  const double scale = 1.0 / std::sqrt(double(n));
  for (std::size_t i = 0; i < n; ++i) {
    double want = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      want += (std::popcount(i & j) % 2 ? -1.0 : 1.0) * v[j];
    CHECK(got[i] == doctest::Approx(want * scale).epsilon(1e-12));
  }
}

TEST_CASE("orthonormal involution preserves energy") {
  for (const std::size_t n : {4u, 64u, 1024u}) {
    const std::vector<double> v = random_vec(n, n);
    std::vector<double> w = v;
    fwht(w);
    double e_in = 0.0, e_out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e_in += v[i] * v[i];
      e_out += w[i] * w[i];
    }
    CHECK(e_out == doctest::Approx(e_in).epsilon(1e-12));
    fwht(w);  // symmetric orthogonal: applying twice is the identity
    for (std::size_t i = 0; i < n; ++i)
      CHECK(w[i] == doctest::Approx(v[i]).epsilon(1e-10));
  }
}

TEST_CASE("rejects non-powers-of-two") {
  std::vector<double> v(12, 1.0);
  CHECK_THROWS_AS(fwht(v), latq::SizeError);
  std::vector<double> empty;
  CHECK_THROWS_AS(fwht(empty), latq::SizeError);
}
