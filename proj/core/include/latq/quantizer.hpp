#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "latq/codebook.hpp"
#include "latq/rng.hpp"

namespace latq {

// Rounds one g-vector at a time inside the adaptive rounding loop.
// `call_id` identifies the (row, block) site so randomized quantizers can
// derive a per-site substream and stay deterministic under any processing
// order or thread count.  `codes`, when non-null, receives stages() words.
class VectorQuantizer {
 public:
  virtual ~VectorQuantizer() = default;

  virtual int dim() const = 0;
  // Number of codewords recorded per call (0 for codeword-free quantizers).
  virtual int stages() const { return 0; }

  virtual void quantize(std::span<const double> in, std::span<double> out,
                        std::uint16_t* codes, std::uint64_t call_id) const = 0;
};

// A single codebook applied at a fixed scale: out = s * decode(encode(in/s)).
class CodebookQuantizer final : public VectorQuantizer {
 public:
  CodebookQuantizer(std::shared_ptr<const Codebook> cb, double scale);

  int dim() const override { return cb_->dim(); }
  int stages() const override { return 1; }
  void quantize(std::span<const double> in, std::span<double> out,
                std::uint16_t* codes, std::uint64_t call_id) const override;

  const Codebook& codebook() const { return *cb_; }
  double scale() const { return scale_; }

 private:
  std::shared_ptr<const Codebook> cb_;
  double scale_;
};

// Nearest point of the unbounded half-integer grid, per coordinate.
class HalfGridQuantizer final : public VectorQuantizer {
 public:
  explicit HalfGridQuantizer(int dim) : dim_(dim) {}

  int dim() const override { return dim_; }
  void quantize(std::span<const double> in, std::span<double> out,
                std::uint16_t* codes, std::uint64_t call_id) const override;

 private:
  int dim_;
};

// Unbiased stochastic rounding to the unbounded half-integer grid: each
// coordinate moves to the bracketing grid point above with probability
// equal to its fractional position, giving E[out] = in and per-coordinate
// variance at most 1/4.
class StochasticGridQuantizer final : public VectorQuantizer {
 public:
  StochasticGridQuantizer(int dim, std::uint64_t seed)
      : dim_(dim), root_(seed) {}

  int dim() const override { return dim_; }
  void quantize(std::span<const double> in, std::span<double> out,
                std::uint16_t* codes, std::uint64_t call_id) const override;

 private:
  int dim_;
  Rng root_;
};

}  // namespace latq
