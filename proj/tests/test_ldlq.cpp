#include <doctest.h>

#include <cmath>
#include <vector>

#include "latq/errors.hpp"
#include "latq/ldlq.hpp"
#include "latq/rng.hpp"
#include "latq/transforms.hpp"

using latq::block_ldl;
using latq::block_ldlq;
using latq::BlockLdl;
using latq::HalfGridQuantizer;
using latq::LdlqResult;
using latq::nearest_round;
using latq::proxy_loss;
using latq::Rng;
using latq::StochasticGridQuantizer;

namespace {

Eigen::MatrixXd random_matrix(long m, long n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd a{m, n};
  for (long j = 0; j < n; ++j)
    for (long i = 0; i < m; ++i) a(i, j) = rng.gaussian();
  return a;
}

Eigen::MatrixXd random_psd(long n, std::uint64_t seed) {
  const Eigen::MatrixXd x = random_matrix(n, 2 * n, seed);
  return x * x.transpose() / double(2 * n);
}

}  // namespace

TEST_CASE("factorization reconstructs H with the right structure") {
  for (const long n : {8L, 32L, 64L}) {
    for (const int g : {1, 4, 8}) {
      const Eigen::MatrixXd h = random_psd(n, std::uint64_t(n * 10 + g));
      const BlockLdl f = block_ldl(h, g);
      CHECK(f.g == g);
      const double rel =
          (h - f.l.transpose() * f.d * f.l).norm() / h.norm();
      CHECK(rel < 1e-10);

      const long nb = n / g;
      for (long bi = 0; bi < nb; ++bi) {
        // Identity diagonal blocks of L.
        CHECK((f.l.block(bi * g, bi * g, g, g) -
               Eigen::MatrixXd::Identity(g, g))
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
        for (long bj = bi + 1; bj < nb; ++bj) {
          // L has no entries above its block diagonal.
          CHECK(f.l.block(bi * g, bj * g, g, g).cwiseAbs().maxCoeff() ==
                0.0);
          // D has no entries off its block diagonal.
          CHECK(f.d.block(bi * g, bj * g, g, g).cwiseAbs().maxCoeff() ==
                0.0);
          CHECK(f.d.block(bj * g, bi * g, g, g).cwiseAbs().maxCoeff() ==
                0.0);
        }
        // Diagonal blocks of D are PSD.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            f.d.block(bi * g, bi * g, g, g));
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
      }
    }
  }
}

TEST_CASE("edge factorizations") {
  const long n = 16;
  const Eigen::MatrixXd h = random_psd(n, 3);

  // g = n: single block, L = I, D = H.
  const BlockLdl whole = block_ldl(h, int(n));
  CHECK((whole.l - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK((whole.d - h).cwiseAbs().maxCoeff() < 1e-12);

  // H = I: L = I, D = I at any block size.
  const BlockLdl eye = block_ldl(Eigen::MatrixXd::Identity(n, n), 4);
  CHECK((eye.l - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK((eye.d - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <
        1e-12);

  CHECK_THROWS_AS(block_ldl(h, 5), latq::SizeError);   // 5 does not divide 16
  CHECK_THROWS_AS(block_ldl(h, 0), latq::SizeError);
  CHECK_THROWS_AS(block_ldl(-Eigen::MatrixXd::Identity(n, n), 4),
                  latq::NumericalError);
}

TEST_CASE("rank-deficient PSD matrices are rescued by the ridge retry") {
  const long n = 24;
  const Eigen::MatrixXd x = random_matrix(n, n / 2, 5);
  const Eigen::MatrixXd h = x * x.transpose() / double(n / 2);  // rank n/2
  const BlockLdl f = block_ldl(h, 4);
  // Reconstruction matches the ridged matrix, so it is close in relative
  // terms but not exact.
  const double rel = (h - f.l.transpose() * f.d * f.l).norm() / h.norm();
  CHECK(rel < 1e-2);
}

TEST_CASE("adaptive rounding beats nearest under a correlated Hessian") {
  const long m = 24, n = 32;
  const Eigen::MatrixXd w = random_matrix(m, n, 7);
  const Eigen::MatrixXd h = random_psd(n, 11);
  const HalfGridQuantizer q(8);

  const LdlqResult adaptive = block_ldlq(w, h, q, 8);
  const LdlqResult nearest = nearest_round(w, q, 8, &h);
  CHECK(adaptive.report.proxy_loss < nearest.report.proxy_loss);
  CHECK(adaptive.report.quantizer_calls == std::size_t(m * (n / 8)));
  CHECK(adaptive.report.block_residual_norms.size() == std::size_t(n / 8));

  // Proxy values are consistent with the definition.
  CHECK(adaptive.report.proxy_loss ==
        doctest::Approx(proxy_loss(w, adaptive.w_hat, h)).epsilon(1e-9));
  CHECK(adaptive.report.proxy_loss > 0.0);
}

TEST_CASE("reported block residuals satisfy eta = (W - W_hat) L^T") {
  const long m = 16, n = 32;
  const int g = 8;
  const Eigen::MatrixXd w = random_matrix(m, n, 13);
  const Eigen::MatrixXd h = random_psd(n, 17);
  const HalfGridQuantizer q(g);
  const LdlqResult res = block_ldlq(w, h, q, g);

  const BlockLdl f = block_ldl(h, g);
  const Eigen::MatrixXd eta = (w - res.w_hat) * f.l.transpose();
  REQUIRE(res.report.block_residual_norms.size() == std::size_t(n / g));
  for (long k = 0; k < n / g; ++k) {
    const double want = eta.block(0, k * g, m, g).norm();
    CHECK(res.report.block_residual_norms[std::size_t(k)] ==
          doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("scalar path matches a textbook per-column reference") {
  const long m = 8, n = 16;
  const Eigen::MatrixXd w = random_matrix(m, n, 19);
  const Eigen::MatrixXd h = random_psd(n, 23);
  const HalfGridQuantizer q(1);
  const LdlqResult res = block_ldlq(w, h, q, 1);

  // Reference: columns left to right, each quantizing w_k plus the
  // accumulated error against U = L^T - I, one coordinate at a time.
  const BlockLdl f = block_ldl(h, 1);
  const Eigen::MatrixXd u =
      f.l.transpose() - Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd w_hat{m, n};
  for (long i = 0; i < m; ++i) {
    Eigen::VectorXd err = Eigen::VectorXd::Zero(n);
    for (long k = 0; k < n; ++k) {
      const double target = w(i, k) + err.head(k).dot(u.col(k).head(k));
      const double rounded = std::floor(target) + 0.5;
      w_hat(i, k) = rounded;
      err[k] = w(i, k) - rounded;  // feedback carries W - W_hat
    }
  }
  CHECK((res.w_hat - w_hat).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("results are identical at any thread count") {
  const long m = 40, n = 32;
  const Eigen::MatrixXd w = random_matrix(m, n, 29);
  const Eigen::MatrixXd h = random_psd(n, 31);
  const HalfGridQuantizer q(4);
  const LdlqResult t1 = block_ldlq(w, h, q, 4, 1);
  const LdlqResult t3 = block_ldlq(w, h, q, 4, 3);
  const LdlqResult t8 = block_ldlq(w, h, q, 4, 8);
  CHECK(t1.w_hat == t3.w_hat);
  CHECK(t1.w_hat == t8.w_hat);
  CHECK(t1.report.proxy_loss == t8.report.proxy_loss);
  CHECK(t1.report.block_residual_norms == t8.report.block_residual_norms);
}

TEST_CASE("identity Hessian disables feedback") {
  const long m = 12, n = 24;
  const Eigen::MatrixXd w = random_matrix(m, n, 37);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const HalfGridQuantizer q(8);
  const LdlqResult adaptive = block_ldlq(w, eye, q, 8);
  const LdlqResult nearest = nearest_round(w, q, 8, &eye);
  CHECK(adaptive.w_hat == nearest.w_hat);
  CHECK(adaptive.report.proxy_loss ==
        doctest::Approx(nearest.report.proxy_loss).epsilon(1e-12));
}

TEST_CASE("mismatched quantizer and block sizes are rejected") {
  const Eigen::MatrixXd w = random_matrix(4, 16, 41);
  const Eigen::MatrixXd h = random_psd(16, 43);
  const HalfGridQuantizer q8(8);
  CHECK_THROWS_AS(block_ldlq(w, h, q8, 4), latq::SizeError);
  CHECK_THROWS_AS(block_ldlq(w, h, q8, 3), latq::SizeError);
}

TEST_CASE("stochastic rounding is unbiased with bounded variance") {
  const StochasticGridQuantizer q(1, 51);
  const double x = 0.3;  // grid neighbors -0.5 and +0.5
  double sum = 0.0;
  const int trials = 4000;
  for (int i = 0; i < trials; ++i) {
    double out = 0.0;
    q.quantize(std::span<const double>(&x, 1), std::span<double>(&out, 1),
               nullptr, std::uint64_t(i));
    CHECK((out == -0.5 || out == 0.5));
    sum += out;
  }
  CHECK(sum / trials == doctest::Approx(x).epsilon(0.15));

  // Same call_id, same draw: determinism under reordering.
  double a = 0.0, b = 0.0;
  q.quantize(std::span<const double>(&x, 1), std::span<double>(&a, 1),
             nullptr, 12345);
  q.quantize(std::span<const double>(&x, 1), std::span<double>(&b, 1),
             nullptr, 12345);
  CHECK(a == b);

  const Eigen::MatrixXd w = random_matrix(16, 16, 53);
  const Eigen::MatrixXd r1 = latq::stochastic_round(w, 4, 99);
  const Eigen::MatrixXd r2 = latq::stochastic_round(w, 4, 99);
  CHECK(r1 == r2);
  CHECK((r1 - w).cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("error bound evaluates the closed form") {
  const long n = 16;
  const Eigen::MatrixXd h = random_psd(n, 57);
  const int g = 4, m = 8;
  const double sigma2 = 0.25;
  const double bound = latq::rounding_error_bound(h, g, m, sigma2);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const double mu = latq::measure_incoherence_h(h);
  const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double want =
      (g * m * mu * mu * sigma2 / double(n)) * tr_sqrt * tr_sqrt;
  CHECK(bound == doctest::Approx(want).epsilon(1e-9));
}
