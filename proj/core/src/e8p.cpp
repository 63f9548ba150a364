#include "latq/e8p.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <vector>

#include "latq/errors.hpp"

namespace latq {
namespace {

// The 29 padding rows (doubled coordinates, sum of squares 48).  Their
// order is fixed: codewords index into this table, so it is part of the
// serialized format.
constexpr std::int8_t kPadRows[29][8] = {
    {3, 1, 1, 1, 3, 3, 3, 3}, {1, 3, 1, 1, 3, 3, 3, 3},
    {1, 1, 3, 1, 3, 3, 3, 3}, {1, 1, 1, 3, 3, 3, 3, 3},
    {3, 3, 3, 1, 3, 3, 1, 1}, {3, 3, 3, 1, 3, 1, 3, 1},
    {3, 3, 3, 1, 1, 3, 3, 1}, {3, 3, 3, 1, 3, 1, 1, 3},
    {3, 3, 3, 1, 1, 3, 1, 3}, {3, 3, 3, 1, 1, 1, 3, 3},
    {3, 3, 1, 3, 3, 3, 1, 1}, {3, 3, 1, 3, 3, 1, 3, 1},
    {3, 3, 1, 3, 1, 3, 3, 1}, {3, 3, 1, 3, 3, 1, 1, 3},
    {3, 3, 1, 3, 1, 3, 1, 3}, {3, 3, 1, 3, 1, 1, 3, 3},
    {3, 1, 3, 3, 3, 3, 1, 1}, {3, 1, 3, 3, 3, 1, 3, 1},
    {3, 1, 3, 3, 1, 3, 3, 1}, {3, 1, 3, 3, 3, 1, 1, 3},
    {3, 1, 3, 3, 1, 3, 1, 3}, {1, 3, 3, 3, 1, 1, 3, 3},
    {1, 3, 3, 3, 3, 3, 1, 1}, {1, 3, 3, 3, 3, 1, 3, 1},
    {1, 3, 3, 3, 1, 3, 3, 1}, {1, 3, 3, 3, 3, 1, 1, 3},
    {1, 3, 3, 3, 1, 3, 1, 3}, {1, 1, 3, 3, 1, 3, 3, 3},
    {3, 3, 1, 1, 3, 3, 3, 1},
};

}  // namespace

E8PTables build_e8p() {
  E8PTables t{};
  std::vector<std::array<std::int8_t, 8>> rows;
  rows.reserve(227);
  // All odd positive patterns with doubled sum of squares <= 40; entries
  // above 5 are impossible (7^2 alone exceeds the budget).
  std::array<std::int8_t, 8> cur{};
  auto rec = [&](auto&& self, int pos, int budget) -> void {
    if (pos == 8) {
      rows.push_back(cur);
      return;
    }
    for (std::int8_t v : {std::int8_t{1}, std::int8_t{3}, std::int8_t{5}}) {
      const int cost = v * v;
      if (cost > budget) break;
      cur[static_cast<std::size_t>(pos)] = v;
      self(self, pos + 1, budget - cost);
    }
  };
  rec(rec, 0, 40);
  std::sort(rows.begin(), rows.end());
  if (rows.size() != 227)
    throw NumericalError("e8p: expected 227 ball patterns, got " +
                         std::to_string(rows.size()));
  for (std::size_t i = 0; i < 227; ++i) t.doubled[i] = rows[i];
  for (std::size_t i = 0; i < 29; ++i)
    for (std::size_t c = 0; c < 8; ++c) t.doubled[227 + i][c] = kPadRows[i][c];

  for (std::size_t i = 0; i < 256; ++i) {
    int sum = 0;
    for (std::size_t c = 0; c < 8; ++c) sum += t.doubled[i][c];
    // All-positive doubled sum mod 4 is 0 or 2 (entries are odd); the coset
    // condition asks for a doubled sum = 0 (mod 4) after sign flips, and
    // each flip changes the sum by 2 (mod 4).
    t.odd_parity[i] = static_cast<std::uint8_t>(sum % 4 == 2);
  }
  return t;
}

const E8PTables& e8p_tables() {
  static const E8PTables t = build_e8p();
  return t;
}

void e8p_decode(const E8PTables& t, std::uint16_t word, std::span<double> out) {
  if (out.size() != 8) throw SizeError("e8p_decode: output must have length 8");
  const std::size_t idx = word >> 8;
  const unsigned sign_bits = (word >> 1) & 0x7Fu;
  const double shift = (word & 1u) ? 0.25 : -0.25;

  // Word bit j (1..7) negates coordinate 8 - j.
  unsigned flips = 0;
  double vals[8];
  for (std::size_t c = 0; c < 8; ++c) vals[c] = 0.5 * t.doubled[idx][c];
  for (unsigned j = 1; j <= 7; ++j) {
    if (sign_bits >> (j - 1) & 1u) {
      vals[8 - j] = -vals[8 - j];
      ++flips;
    }
  }
  // Coordinate 0 takes whatever sign restores the row's parity.
  if ((flips & 1u) != t.odd_parity[idx]) vals[0] = -vals[0];
  for (std::size_t c = 0; c < 8; ++c) out[c] = vals[c] + shift;
}

namespace {

inline std::uint16_t assemble_word(std::size_t idx, const int* sigma,
                                   unsigned shift_bit) {
  unsigned sign_bits = 0;
  for (unsigned j = 1; j <= 7; ++j)
    if (sigma[8 - j] < 0) sign_bits |= 1u << (j - 1);
  return static_cast<std::uint16_t>((idx << 8) | (sign_bits << 1) | shift_bit);
}

}  // namespace

std::uint16_t e8p_encode(const E8PTables& t, std::span<const double> v) {
  if (v.size() != 8) throw SizeError("e8p_encode: input must have length 8");
  double best_dist = std::numeric_limits<double>::infinity();
  std::uint16_t best_word = 0;
  double point[8];
  for (std::size_t idx = 0; idx < 256; ++idx) {
    for (unsigned shift_bit = 0; shift_bit < 2; ++shift_bit) {
      const double shift = shift_bit ? 0.25 : -0.25;
      // Optimal signs: match sign(v - shift) coordinatewise (ties keep +).
      // If that violates the row parity, flipping the coordinate with the
      // smallest |v - shift| * s loses the least.
      int sigma[8];
      unsigned flips = 0;
      double min_pen = std::numeric_limits<double>::infinity();
      std::size_t min_c = 0;
      for (std::size_t c = 0; c < 8; ++c) {
        const double y = v[c] - shift;
        sigma[c] = y < 0.0 ? -1 : 1;
        if (sigma[c] < 0) ++flips;
        const double pen = std::fabs(y) * (0.5 * t.doubled[idx][c]);
        if (pen < min_pen) {
          min_pen = pen;
          min_c = c;
        }
      }
      if ((flips & 1u) != t.odd_parity[idx]) sigma[min_c] = -sigma[min_c];
      const std::uint16_t word = assemble_word(idx, sigma, shift_bit);
      // Distance through the decoder itself so the value is bitwise equal
      // to what an exhaustive scan computes for this word.
      e8p_decode(t, word, point);
      double dist = 0.0;
      for (std::size_t c = 0; c < 8; ++c) {
        const double d = v[c] - point[c];
        dist += d * d;
      }
      if (dist < best_dist || (dist == best_dist && word < best_word)) {
        best_dist = dist;
        best_word = word;
      }
    }
  }
  return best_word;
}

double e8p_sq_error(const E8PTables& t, std::span<const double> v) {
  if (v.size() != 8) throw SizeError("e8p_sq_error: input must have length 8");
  double best = std::numeric_limits<double>::infinity();
  for (unsigned shift_bit = 0; shift_bit < 2; ++shift_bit) {
    const double shift = shift_bit ? 0.25 : -0.25;
    double a[8];
    double norm_y = 0.0;
    unsigned neg = 0;
    for (std::size_t c = 0; c < 8; ++c) {
      const double y = v[c] - shift;
      if (y < 0.0) ++neg;
      a[c] = std::fabs(y);
      norm_y += y * y;
    }
    const unsigned sigma_parity = neg & 1u;
    for (std::size_t idx = 0; idx < 256; ++idx) {
      double dot = 0.0, norm_s = 0.0, min_pen = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < 8; ++c) {
        const double s = 0.5 * t.doubled[idx][c];
        dot += a[c] * s;
        norm_s += s * s;
        min_pen = std::min(min_pen, a[c] * s);
      }
      double dist = norm_y + norm_s - 2.0 * dot;
      if (sigma_parity != t.odd_parity[idx]) dist += 4.0 * min_pen;
      best = std::min(best, dist);
    }
  }
  return best;
}

}  // namespace latq
