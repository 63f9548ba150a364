#include "latq/ldlq.hpp"

#include <cmath>
#include <sstream>

#include "latq/errors.hpp"
#include "latq/parallel.hpp"

namespace latq {
namespace {

// Right-looking block Cholesky, M = C C^T with C block lower triangular
// and lower-triangular diagonal blocks.  Returns the original-order index
// of the failing pivot block on failure, -1 on success.  `nb` blocks of
// size g; `reversed` maps block k here to original block nb-1-k in error
// messages.
int block_cholesky(Eigen::MatrixXd& m, int g, Eigen::MatrixXd& c) {
  const int n = static_cast<int>(m.rows());
  const int nb = n / g;
  c.setZero(n, n);
  for (int k = 0; k < nb; ++k) {
    Eigen::MatrixXd pivot = m.block(k * g, k * g, g, g);
    Eigen::LLT<Eigen::MatrixXd> llt(pivot);
    if (llt.info() != Eigen::Success) return nb - 1 - k;
    const Eigen::MatrixXd ckk = llt.matrixL();
    c.block(k * g, k * g, g, g) = ckk;
    for (int i = k + 1; i < nb; ++i) {
      // C_ik solves C_ik * C_kk^T = M_ik.
      Eigen::MatrixXd rhs = m.block(i * g, k * g, g, g).transpose();
      c.block(i * g, k * g, g, g) =
          ckk.triangularView<Eigen::Lower>().solve(rhs).transpose();
    }
    for (int i = k + 1; i < nb; ++i)
      for (int j = k + 1; j <= i; ++j)
        m.block(i * g, j * g, g, g) -=
            c.block(i * g, k * g, g, g) *
            c.block(j * g, k * g, g, g).transpose();
  }
  return -1;
}

BlockLdl factor_once(const Eigen::MatrixXd& h, int g, int* failed_block) {
  const int n = static_cast<int>(h.rows());
  const int nb = n / g;
  *failed_block = -1;

  // Factor the index-reversed matrix so the resulting triangle points the
  // way the ascending rounding order needs it.
  Eigen::MatrixXd rev = h.reverse();
  Eigen::MatrixXd c;
  const int bad = block_cholesky(rev, g, c);
  if (bad >= 0) {
    *failed_block = bad;
    return {};
  }

  // rev = C C^T  =>  H = U' U'^T with U' upper triangular.
  Eigen::MatrixXd u = c.reverse();

  BlockLdl out;
  out.g = g;
  out.d.setZero(n, n);
  // Normalize each block column by its diagonal block: U' = L^T * B and
  // D = B B^T, so H = L^T D L with unit block diagonal in L.
  Eigen::MatrixXd lt = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < nb; ++k) {
    const Eigen::MatrixXd b = u.block(k * g, k * g, g, g);
    out.d.block(k * g, k * g, g, g) = b * b.transpose();
    const int rows = (k + 1) * g;
    // Solve X * B = U'(0:rows, k) for X.
    Eigen::MatrixXd rhs = u.block(0, k * g, rows, g).transpose();
    lt.block(0, k * g, rows, g) =
        b.transpose()
            .triangularView<Eigen::Lower>()
            .solve(rhs)
            .transpose();
  }
  out.l = lt.transpose();
  return out;
}

}  // namespace

BlockLdl block_ldl(const Eigen::MatrixXd& h, int g) {
  if (h.rows() != h.cols()) throw SizeError("block_ldl: H must be square");
  const int n = static_cast<int>(h.rows());
  if (g <= 0 || n % g != 0)
    throw SizeError("block_ldl: block size must divide n");

  int failed = -1;
  BlockLdl out = factor_once(h, g, &failed);
  if (failed < 0) return out;

  const double lambda = 1e-4 * h.diagonal().mean();
  Eigen::MatrixXd reg = h;
  reg.diagonal().array() += lambda;
  out = factor_once(reg, g, &failed);
  if (failed < 0) return out;
  throw NumericalError(
      "block_ldl: Cholesky failed at pivot block " + std::to_string(failed) +
      " even after regularization");
}

double proxy_loss(const Eigen::MatrixXd& w, const Eigen::MatrixXd& w_hat,
                  const Eigen::MatrixXd& h) {
  if (w.rows() != w_hat.rows() || w.cols() != w_hat.cols())
    throw SizeError("proxy_loss: W and W_hat differ in shape");
  if (h.rows() != h.cols() || h.rows() != w.cols())
    throw SizeError("proxy_loss: H must be n x n with n = cols(W)");
  const Eigen::MatrixXd e = w - w_hat;
  return (e * h).cwiseProduct(e).sum();
}

std::string RoundingReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"proxy_loss\":" << proxy_loss << ",\"blocks\":[";
  for (std::size_t i = 0; i < block_residual_norms.size(); ++i) {
    if (i) os << ",";
    os << block_residual_norms[i];
  }
  os << "],\"quantizer_calls\":" << quantizer_calls << "}";
  return os.str();
}

namespace {

LdlqResult round_with_feedback(const Eigen::MatrixXd& w,
                               const Eigen::MatrixXd* h,
                               const Eigen::MatrixXd* u,
                               const VectorQuantizer& q, int g, int threads) {
  const int m = static_cast<int>(w.rows());
  const int n = static_cast<int>(w.cols());
  const int nb = n / g;
  const int stages = q.stages();

  LdlqResult res;
  res.w_hat.resize(m, n);
  res.codes.assign(static_cast<std::size_t>(stages),
                   std::vector<std::uint16_t>(
                       static_cast<std::size_t>(m) * nb));
  std::vector<double> block_sq(static_cast<std::size_t>(nb), 0.0);
  std::vector<std::vector<double>> chunk_block_sq;

  // Rows are independent; parallelize across rows with per-chunk residual
  // accumulators merged in chunk order.
  const std::size_t chunks =
      std::min<std::size_t>(kReductionChunks, static_cast<std::size_t>(m));
  chunk_block_sq.assign(chunks,
                        std::vector<double>(static_cast<std::size_t>(nb), 0.0));
  parallel_chunks(
      static_cast<std::size_t>(m), chunks, threads,
      [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Eigen::VectorXd err(n);        // this row of W - W_hat
        std::vector<double> in(g), out(g);
        std::vector<std::uint16_t> words(std::max(1, stages));
        for (std::size_t r = begin; r < end; ++r) {
          const auto row = static_cast<Eigen::Index>(r);
          for (int k = 0; k < nb; ++k) {
            for (int c = 0; c < g; ++c) in[c] = w(row, k * g + c);
            if (u) {
              // Feedback: (W - W_hat)_{0..kg} U_{0..kg, k}.
              const int lead = k * g;
              if (lead > 0) {
                Eigen::VectorXd fb =
                    u->block(0, lead, lead, g).transpose() *
                    err.head(lead);
                for (int c = 0; c < g; ++c) in[c] += fb(c);
              }
            }
            q.quantize(in, out, stages > 0 ? words.data() : nullptr,
                       static_cast<std::uint64_t>(r) * nb +
                           static_cast<std::uint64_t>(k));
            double sq = 0.0;
            for (int c = 0; c < g; ++c) {
              res.w_hat(row, k * g + c) = out[c];
              err(k * g + c) = w(row, k * g + c) - out[c];
              const double d = in[c] - out[c];
              sq += d * d;
            }
            chunk_block_sq[chunk][static_cast<std::size_t>(k)] += sq;
            for (int s = 0; s < stages; ++s)
              res.codes[static_cast<std::size_t>(s)]
                       [r * static_cast<std::size_t>(nb) +
                        static_cast<std::size_t>(k)] = words[static_cast<std::size_t>(s)];
          }
        }
      });

  for (std::size_t c = 0; c < chunks; ++c)
    for (int k = 0; k < nb; ++k)
      block_sq[static_cast<std::size_t>(k)] +=
          chunk_block_sq[c][static_cast<std::size_t>(k)];

  res.report.quantizer_calls =
      static_cast<std::size_t>(m) * static_cast<std::size_t>(nb);
  res.report.block_residual_norms.resize(static_cast<std::size_t>(nb));
  for (int k = 0; k < nb; ++k)
    res.report.block_residual_norms[static_cast<std::size_t>(k)] =
        std::sqrt(block_sq[static_cast<std::size_t>(k)]);
  if (h) res.report.proxy_loss = proxy_loss(w, res.w_hat, *h);
  return res;
}

}  // namespace

LdlqResult block_ldlq(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                      const VectorQuantizer& q, int g, int threads) {
  if (h.rows() != h.cols() || h.rows() != w.cols())
    throw SizeError("block_ldlq: H must be n x n with n = cols(W)");
  if (q.dim() != g)
    throw SizeError("block_ldlq: quantizer dim != block size");
  const BlockLdl ldl = block_ldl(h, g);
  const Eigen::MatrixXd u =
      ldl.l.transpose() - Eigen::MatrixXd::Identity(h.rows(), h.cols());
  return round_with_feedback(w, &h, &u, q, g, threads);
}

LdlqResult nearest_round(const Eigen::MatrixXd& w, const VectorQuantizer& q,
                         int g, const Eigen::MatrixXd* h, int threads) {
  if (w.cols() % g != 0)
    throw SizeError("nearest_round: block size must divide n");
  if (q.dim() != g)
    throw SizeError("nearest_round: quantizer dim != block size");
  return round_with_feedback(w, h, nullptr, q, g, threads);
}

Eigen::MatrixXd stochastic_round(const Eigen::MatrixXd& w, int g,
                                 std::uint64_t seed) {
  if (g <= 0 || w.cols() % g != 0)
    throw SizeError("stochastic_round: block size must divide n");
  StochasticGridQuantizer q(g, seed);
  return nearest_round(w, q, g).w_hat;
}

double rounding_error_bound(const Eigen::MatrixXd& h, int g, int m,
                            double sigma2) {
  if (h.rows() != h.cols())
    throw SizeError("rounding_error_bound: H must be square");
  const int n = static_cast<int>(h.rows());
  if (g <= 0 || n % g != 0)
    throw SizeError("rounding_error_bound: block size must divide n");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 *
                                                    (h + h.transpose()));
  if (es.info() != Eigen::Success)
    throw NumericalError("rounding_error_bound: eigendecomposition failed");
  const double mu = std::sqrt(static_cast<double>(n)) *
                    es.eigenvectors().cwiseAbs().maxCoeff();
  double tr_sqrt = 0.0;
  for (int i = 0; i < n; ++i)
    tr_sqrt += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
  return (static_cast<double>(g) * m * mu * mu * sigma2 /
          static_cast<double>(n)) *
         tr_sqrt * tr_sqrt;
}

}  // namespace latq
