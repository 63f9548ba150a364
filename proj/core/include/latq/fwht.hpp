#pragma once

#include <cstddef>
#include <span>

namespace latq {

constexpr bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place orthonormal Walsh-Hadamard transform; x.size() must be a power of
// two.  The transform is its own inverse (the matrix is symmetric orthogonal).
void fwht(std::span<double> x);

}  // namespace latq
