#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "latq/bitpack.hpp"
#include "latq/hadamard.hpp"
#include "latq/rfft.hpp"
#include "latq/rng.hpp"

namespace latq {

enum class TransformKind : std::uint8_t {
  rht = 0,   // random sign diagonal followed by the Hadamard-style transform
  rfft = 1,  // random unit phases followed by the orthonormal DFT on pairs
};

const char* transform_name(TransformKind kind);
TransformKind parse_transform(std::string_view name);

// One orthogonal side of the incoherence processing.  Only the randomness
// (signs or phases) plus the dimension need to be stored; the deterministic
// part is recomputed from the dimension.
struct SideTransform {
  TransformKind kind = TransformKind::rht;
  std::size_t n = 0;
  HadamardSpec spec;    // rht only
  SignVector signs;     // rht only
  PhaseVector phases;   // rfft only

  // x <- T x, where T = (Hadamard) * diag(signs) or (DFT) * (phases).
  void apply(std::span<double> x) const;
  // x <- T^T x.  T is orthogonal but not symmetric, so this is T^{-1}.
  void apply_transpose(std::span<double> x) const;
};

SideTransform make_rht_side(std::size_t n, Rng rng);
SideTransform make_rfft_side(std::size_t n, Rng rng);

// A <- T A (each column transformed), or T^T A when transpose is set.
void transform_cols(const SideTransform& side, Eigen::MatrixXd& a,
                    bool transpose = false);
// A <- A T^T (each row transformed by T), or A T when transpose is set.
void transform_rows(const SideTransform& side, Eigen::MatrixXd& a,
                    bool transpose = false);

// Dense matrix of T; for tests and debugging.
Eigen::MatrixXd dense_transform(const SideTransform& side);

// A weight/Hessian pair rotated into the incoherent domain:
//   w_hat = T_u W T_v^T,   h_hat = T_v H T_v^T.
struct IncoherentLayer {
  Eigen::MatrixXd w_hat;
  Eigen::MatrixXd h_hat;
  SideTransform left;   // T_u, dimension m
  SideTransform right;  // T_v, dimension n
};

// Validates H (symmetrized internally; eigenvalues >= -1e-8 * max required),
// then conjugates with fresh random transforms drawn from `seed`:
// substream 0 feeds the left side, substream 1 the right side.
IncoherentLayer ip_rht(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                       std::uint64_t seed);
IncoherentLayer ip_rfft(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                        std::uint64_t seed);

// max|W_ij| * sqrt(m n) / ||W||_F; 0 for the zero matrix.
double measure_incoherence_w(const Eigen::MatrixXd& w);

// sqrt(n) * max|Q_ij| over the orthonormal eigenvectors Q of (H + H^T)/2.
double measure_incoherence_h(const Eigen::MatrixXd& h);

struct MuBounds {
  double mu_h = 0.0;  // sqrt(2 * ln(2 n^2 / delta))
  double mu_w = 0.0;  // 2 * ln(4 m n / delta)
};
MuBounds mu_bounds(std::size_t n, std::size_t m, double delta);

// Throws ValidationError unless (H + H^T)/2 has min eig >= -1e-8 * max eig.
// Returns the symmetrized matrix.
Eigen::MatrixXd validate_psd(const Eigen::MatrixXd& h);

}  // namespace latq
