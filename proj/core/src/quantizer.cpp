#include "latq/quantizer.hpp"

#include <cmath>

#include "latq/errors.hpp"

namespace latq {

CodebookQuantizer::CodebookQuantizer(std::shared_ptr<const Codebook> cb,
                                     double scale)
    : cb_(std::move(cb)), scale_(scale) {
  if (!cb_) throw ValidationError("CodebookQuantizer: null codebook");
  if (!(scale_ > 0.0) || !std::isfinite(scale_))
    throw ValidationError("CodebookQuantizer: scale must be positive");
}

void CodebookQuantizer::quantize(std::span<const double> in,
                                 std::span<double> out, std::uint16_t* codes,
                                 std::uint64_t /*call_id*/) const {
  const auto d = static_cast<std::size_t>(cb_->dim());
  if (in.size() != d || out.size() != d)
    throw SizeError("CodebookQuantizer: vector length != dim");
  std::vector<double> scaled(d);
  for (std::size_t c = 0; c < d; ++c) scaled[c] = in[c] / scale_;
  const std::uint32_t word = cb_->encode(scaled);
  cb_->decode(word, out);
  for (std::size_t c = 0; c < d; ++c) out[c] *= scale_;
  if (codes) codes[0] = static_cast<std::uint16_t>(word);
}

void HalfGridQuantizer::quantize(std::span<const double> in,
                                 std::span<double> out, std::uint16_t* codes,
                                 std::uint64_t /*call_id*/) const {
  if (in.size() != static_cast<std::size_t>(dim_) || out.size() != in.size())
    throw SizeError("HalfGridQuantizer: vector length != dim");
  (void)codes;
  for (std::size_t c = 0; c < in.size(); ++c)
    out[c] = std::floor(in[c]) + 0.5;
}

void StochasticGridQuantizer::quantize(std::span<const double> in,
                                       std::span<double> out,
                                       std::uint16_t* codes,
                                       std::uint64_t call_id) const {
  if (in.size() != static_cast<std::size_t>(dim_) || out.size() != in.size())
    throw SizeError("StochasticGridQuantizer: vector length != dim");
  (void)codes;
  Rng rng = root_.substream(call_id);
  for (std::size_t c = 0; c < in.size(); ++c) {
    // Largest grid point <= x and its fractional position in the unit cell.
    const double lo = std::floor(in[c] + 0.5) - 0.5;
    const double frac = in[c] - lo;
    out[c] = lo + (rng.uniform() < frac ? 1.0 : 0.0);
  }
}

}  // namespace latq
