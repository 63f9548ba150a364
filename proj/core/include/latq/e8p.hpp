#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace latq {

// Tables backing the 16-bit, 2-bit-per-weight E8 codebook.
//
// The codebook stores 2^16 points of the quarter-shifted lattice
// E8 + 1/4: a 256-row table S of positive half-integer patterns, 7 explicit
// sign bits, one inferred sign, and a global +-1/4 shift.
//
// S layout (doubled coordinates, so all entries are odd integers):
//   rows   0..226: every pattern in {1,3,5}^8 with sum of squares <= 40,
//                  sorted ascending in lexicographic order;
//   rows 227..255: 29 fixed padding patterns with sum of squares 48, in
//                  the codebook's canonical order (part of the format).
// odd_parity[i] is 1 when row i needs an odd number of negative signs for
// the sign-flipped pattern to land in the even-sum half-integer coset.
struct E8PTables {
  std::array<std::array<std::int8_t, 8>, 256> doubled;
  std::array<std::uint8_t, 256> odd_parity;
};

// Builds the tables from scratch (used by tests); `e8p_tables` caches one.
E8PTables build_e8p();
const E8PTables& e8p_tables();

// Codeword layout: [15..8] row index, [7..1] sign bits, [0] shift bit.
// Sign bit at word position j (1..7) negates coordinate 8 - j; coordinate 0
// carries the inferred sign that restores the row's parity.  Shift bit 1
// adds +1/4 to every coordinate, 0 adds -1/4.
void e8p_decode(const E8PTables& t, std::uint16_t word, std::span<double> out);

// Exact nearest codeword under squared Euclidean distance.  Evaluates, for
// each (row, shift) pair, the provably optimal sign pattern, and computes
// each candidate's distance through e8p_decode with a left-to-right
// accumulation — the same arithmetic an exhaustive 2^16 scan performs — so
// the minimum matches an exhaustive scan bit for bit.  Ties break toward
// the numerically smallest codeword.
std::uint16_t e8p_encode(const E8PTables& t, std::span<const double> v);

// Squared distance from v to the nearest codeword, via a faster expanded
// form (norm + dot table); used by Monte Carlo sweeps where the last-ulp
// agreement of e8p_encode is not required.
double e8p_sq_error(const E8PTables& t, std::span<const double> v);

}  // namespace latq
