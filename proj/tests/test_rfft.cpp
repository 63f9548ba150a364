#include <doctest.h>

#include <cmath>
#include <vector>

#include "latq/bitpack.hpp"
#include "latq/errors.hpp"
#include "latq/rfft.hpp"
#include "latq/rng.hpp"

using latq::dense_rfft;
using latq::PhaseVector;
using latq::rfft_apply;

namespace {

PhaseVector phases_for(std::size_t n, std::uint64_t seed) {
  latq::Rng rng(seed);
  return PhaseVector::random(n, rng);
}

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  latq::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.gaussian();
  return v;
}

}  // namespace

TEST_CASE("dense matrix is orthogonal") {
  for (const std::size_t n : {2u, 8u, 10u, 100u}) {
    const PhaseVector p = phases_for(n, n);
    const Eigen::MatrixXd t = dense_rfft(p);
    REQUIRE(t.rows() == long(n));
    const double err =
        (t.transpose() * t - Eigen::MatrixXd::Identity(long(n), long(n)))
            .cwiseAbs()
            .maxCoeff();
    CHECK(err < 1e-10);
  }
}

TEST_CASE("apply matches the dense matrix in both directions") {
  for (const std::size_t n : {2u, 8u, 10u, 64u}) {
    const PhaseVector p = phases_for(n, 7 * n + 1);
    const Eigen::MatrixXd t = dense_rfft(p);
    const std::vector<double> v = random_vec(n, n + 3);
    const Eigen::Map<const Eigen::VectorXd> vm(v.data(), long(n));

    std::vector<double> fwd = v;
    rfft_apply(p, fwd, false);
    const Eigen::VectorXd want_fwd = t * vm;
    for (std::size_t i = 0; i < n; ++i)
      CHECK(fwd[i] == doctest::Approx(want_fwd[long(i)]).epsilon(1e-10));

    std::vector<double> bwd = v;
    rfft_apply(p, bwd, true);
    const Eigen::VectorXd want_bwd = t.transpose() * vm;
    for (std::size_t i = 0; i < n; ++i)
      CHECK(bwd[i] == doctest::Approx(want_bwd[long(i)]).epsilon(1e-10));
  }
}

TEST_CASE("transpose inverts forward and energy is preserved") {
  const std::size_t n = 100;
  const PhaseVector p = phases_for(n, 5);
  const std::vector<double> v = random_vec(n, 6);
  std::vector<double> w = v;
  rfft_apply(p, w, false);
  double e_in = 0.0, e_out = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e_in += v[i] * v[i];
    e_out += w[i] * w[i];
  }
  CHECK(e_out == doctest::Approx(e_in).epsilon(1e-12));
  rfft_apply(p, w, true);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(w[i] == doctest::Approx(v[i]).epsilon(1e-10));
}

TEST_CASE("odd lengths are rejected") {
  latq::Rng rng(1);
  CHECK_THROWS_AS(PhaseVector::random(9, rng), latq::SizeError);
  PhaseVector p = phases_for(8, 1);
  std::vector<double> v(6, 1.0);
  CHECK_THROWS_AS(rfft_apply(p, v, false), latq::SizeError);
}

TEST_CASE("deterministic given equal phases") {
  const std::size_t n = 16;
  const PhaseVector p1 = phases_for(n, 42), p2 = phases_for(n, 42);
  std::vector<double> a = random_vec(n, 8), b = a;
  rfft_apply(p1, a, false);
  rfft_apply(p2, b, false);
  for (std::size_t i = 0; i < n; ++i) CHECK(a[i] == b[i]);
}
