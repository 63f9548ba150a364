#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "latq/rng.hpp"

namespace latq {

// A +/-1 sign vector stored one bit per entry (bit set means -1), packed
// LSB-first into bytes.  This is the serialized form of the random sign
// diagonals, so equality and byte layout are part of the artifact format.
class SignVector {
 public:
  SignVector() = default;
  explicit SignVector(std::size_t length);  // all +1

  static SignVector random(std::size_t length, Rng& rng);
  static SignVector from_bytes(std::size_t length,
                               std::span<const std::uint8_t> bytes);

  std::size_t size() const { return length_; }
  std::size_t byte_size() const { return (length_ + 7) / 8; }

  int get(std::size_t i) const {
    return (bytes_[i >> 3] >> (i & 7)) & 1 ? -1 : 1;
  }
  void set(std::size_t i, int sign);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  // x[i] *= s[i]
  void apply(std::span<double> x) const;

  bool operator==(const SignVector&) const = default;

 private:
  std::size_t length_ = 0;
  std::vector<std::uint8_t> bytes_;
};

// Unit phases for the complex-pair transform: one angle per consecutive
// pair of real coordinates, so `length` (the real dimension) must be even.
struct PhaseVector {
  std::size_t length = 0;       // real dimension n
  std::vector<double> phases;   // n/2 angles in [0, 2*pi)

  static PhaseVector random(std::size_t length, Rng& rng);

  bool operator==(const PhaseVector&) const = default;
};

}  // namespace latq
