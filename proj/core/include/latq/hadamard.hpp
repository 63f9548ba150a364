#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace latq {

// Orthogonal n x n Hadamard-style transform factored as a Kronecker product
// (Sylvester power-of-two part) x (small dense base), applied in O(n log n).
//
// n = p * q with p the largest power of two such that q = n / p has a dense
// base in the registry.  The element at flat position i is indexed as
// (i / q, i % q), i.e. reshape to p rows of q contiguous entries: the fast
// Walsh butterflies run down the p axis (stride q) and the dense base
// multiplies each contiguous q-row.
struct HadamardSpec {
  std::size_t n = 0;
  std::size_t p = 1;  // power-of-two factor
  std::size_t q = 1;  // dense base order
};

// Row-major q x q matrix with +/-1 entries satisfying B * B^T = q * I.
struct HadamardBase {
  std::size_t q = 0;
  std::vector<std::int8_t> entries;
};

// Supported dense base orders, ascending: {1, 4, 12, 20, 28}.
const std::vector<std::size_t>& hadamard_registry();

// Base for order q; throws SizeError for orders outside the registry.
// Order 4 is Sylvester; 12 and 20 come from quadratic-residue (Paley)
// constructions over GF(11) and GF(19); 28 from the doubling (Paley II)
// construction over GF(13).  Each base is verified against B * B^T = q * I
// once at first use.
const HadamardBase& hadamard_base(std::size_t q);

// Factors n; throws SizeError when no admissible p * q factorization exists.
HadamardSpec plan_hadamard(std::size_t n);

// x <- T x (or T^T x), where T is the orthonormal transform for `spec`.
void had_apply(const HadamardSpec& spec, std::span<double> x,
               bool transpose = false);

// Dense n x n matrix of the same transform; for tests and debugging dumps.
Eigen::MatrixXd dense_hadamard(const HadamardSpec& spec);

}  // namespace latq
