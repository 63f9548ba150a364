#pragma once

#include <Eigen/Dense>
#include <span>

#include "latq/bitpack.hpp"

namespace latq {

// Orthogonal transform on even-length real vectors: consecutive real pairs
// (x[2k], x[2k+1]) are read as complex numbers, rotated by the unit phases
// e^{i theta_k}, and passed through the orthonormal DFT of length n/2.
// As a real n x n matrix the map is orthogonal; `transpose` applies its
// transpose (inverse DFT followed by the conjugate phases).
void rfft_apply(const PhaseVector& phases, std::span<double> x,
                bool transpose = false);

// Dense real n x n matrix of the same map; for tests and debugging.
Eigen::MatrixXd dense_rfft(const PhaseVector& phases);

}  // namespace latq
