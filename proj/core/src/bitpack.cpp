#include "latq/bitpack.hpp"

#include "latq/errors.hpp"

namespace latq {

SignVector::SignVector(std::size_t length)
    : length_(length), bytes_((length + 7) / 8, 0) {}

SignVector SignVector::random(std::size_t length, Rng& rng) {
  SignVector s(length);
  for (std::size_t i = 0; i < length; ++i) s.set(i, rng.sign());
  return s;
}

SignVector SignVector::from_bytes(std::size_t length,
                                  std::span<const std::uint8_t> bytes) {
  SignVector s(length);
  if (bytes.size() != s.byte_size())
    throw SizeError("SignVector::from_bytes: byte count mismatch");
  std::copy(bytes.begin(), bytes.end(), s.bytes_.begin());
  // Zero any trailing pad bits so equality is well defined.
  if (length % 8 != 0)
    s.bytes_.back() &= static_cast<std::uint8_t>((1u << (length % 8)) - 1);
  return s;
}

void SignVector::set(std::size_t i, int sign) {
  const std::uint8_t mask = static_cast<std::uint8_t>(1u << (i & 7));
  if (sign < 0)
    bytes_[i >> 3] |= mask;
  else
    bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
}

void SignVector::apply(std::span<double> x) const {
  if (x.size() != length_) throw SizeError("SignVector::apply: length mismatch");
  for (std::size_t i = 0; i < length_; ++i)
    if ((bytes_[i >> 3] >> (i & 7)) & 1) x[i] = -x[i];
}

PhaseVector PhaseVector::random(std::size_t length, Rng& rng) {
  if (length % 2 != 0)
    throw SizeError("PhaseVector: real dimension must be even");
  PhaseVector p;
  p.length = length;
  p.phases.resize(length / 2);
  // Draw at the storage precision so a serialize/deserialize round trip
  // reproduces the transform bit-for-bit.
  for (double& theta : p.phases)
    theta = static_cast<double>(static_cast<float>(rng.angle()));
  return p;
}

}  // namespace latq
