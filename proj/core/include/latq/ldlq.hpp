#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "latq/quantizer.hpp"

namespace latq {

// Block LDL^T factorization arranged for forward adaptive rounding:
//   H = L^T D L
// with L unit block lower triangular (identity g x g diagonal blocks) and
// D block diagonal PSD.  g must divide n.
struct BlockLdl {
  int g = 0;
  Eigen::MatrixXd l;  // n x n, unit block lower triangular
  Eigen::MatrixXd d;  // n x n, block diagonal
};

// Computed via a block Cholesky of the index-reversed matrix; if a pivot
// block fails, the factorization is retried once on
// H + 1e-4 * mean(diag(H)) * I, and a NumericalError naming the failing
// block is thrown if that also fails.
BlockLdl block_ldl(const Eigen::MatrixXd& h, int g);

// tr((W - W_hat) H (W - W_hat)^T): the layerwise proxy objective.
double proxy_loss(const Eigen::MatrixXd& w, const Eigen::MatrixXd& w_hat,
                  const Eigen::MatrixXd& h);

struct RoundingReport {
  double proxy_loss = 0.0;
  std::vector<double> block_residual_norms;  // ||eta_k||_F per block column
  std::size_t quantizer_calls = 0;

  // {"proxy_loss": ..., "blocks": [...], "quantizer_calls": ...}
  std::string to_json() const;
};

struct LdlqResult {
  Eigen::MatrixXd w_hat;
  RoundingReport report;
  // codes[stage][row * (n/g) + block], present when the quantizer records
  // codewords (its stages() > 0).
  std::vector<std::vector<std::uint16_t>> codes;
};

// Adaptive block rounding: block columns are quantized in ascending order,
// each seeing the accumulated error of already-quantized columns through
// the feedback matrix U = L^T - I:
//   W_hat_k = Q(W_k + (W - W_hat)_{0..k-1} U_{0..k-1,k}).
// Rows are independent and are processed in parallel when threads > 1;
// results are identical at any thread count.  q.dim() must equal g.
LdlqResult block_ldlq(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                      const VectorQuantizer& q, int g, int threads = 1);

// Feedback-free baseline: every block is quantized directly.  The report's
// proxy_loss is filled when `h` is provided, otherwise left at 0.
LdlqResult nearest_round(const Eigen::MatrixXd& w, const VectorQuantizer& q,
                         int g, const Eigen::MatrixXd* h = nullptr,
                         int threads = 1);

// Elementwise unbiased stochastic rounding of W to the half-integer grid
// (variance <= 1/4 per entry); the `g`-block layout only controls call
// granularity.  Deterministic in `seed`.
Eigen::MatrixXd stochastic_round(const Eigen::MatrixXd& w, int g,
                                 std::uint64_t seed);

// Worst-case expected proxy loss of adaptive rounding with an unbiased
// sigma^2-variance quantizer on an m-row weight matrix:
//   (g * m * mu^2 * sigma^2 / n) * tr(H^{1/2})^2
// with mu the observed eigenvector incoherence of H.
double rounding_error_bound(const Eigen::MatrixXd& h, int g, int m,
                            double sigma2);

}  // namespace latq
