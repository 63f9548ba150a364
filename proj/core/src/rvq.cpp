#include "latq/rvq.hpp"

#include <cmath>

#include "latq/errors.hpp"

namespace latq {

RvqScheme default_scheme(int bits) {
  switch (bits) {
    case 2:
      return {{"e8p-2bit", 0.9}};
    case 3:
      return {{"e8p-2bit", 0.98}, {"e8-1bit", 2.04}};
    case 4:
      return {{"e8p-2bit", 1.03}, {"e8p-2bit", 3.45}};
    default:
      throw ValidationError("default_scheme: no preset for " +
                            std::to_string(bits) + " bits");
  }
}

double scheme_bits(const RvqScheme& scheme) {
  double total = 0.0;
  for (const RvqStage& st : scheme) total += make_codebook(st.codebook)->bits();
  return total;
}

std::vector<double> stage_scales(const RvqScheme& scheme, double r1) {
  std::vector<double> scales;
  scales.reserve(scheme.size());
  for (const RvqStage& st : scheme) {
    if (!(st.rho > 0.0))
      throw ValidationError("stage_scales: rho must be positive");
    scales.push_back(r1 > 0.0 ? r1 / st.rho : 1.0);
  }
  return scales;
}

RvqQuantizer::RvqQuantizer(const RvqScheme& scheme,
                           std::vector<double> scales)
    : scales_(std::move(scales)) {
  if (scheme.empty()) throw ValidationError("RvqQuantizer: empty scheme");
  if (scales_.size() != scheme.size())
    throw SizeError("RvqQuantizer: one scale per stage required");
  books_.reserve(scheme.size());
  for (const RvqStage& st : scheme) books_.push_back(make_codebook(st.codebook));
  for (const auto& cb : books_)
    if (cb->dim() != books_.front()->dim())
      throw ValidationError("RvqQuantizer: stages must share one dimension");
  for (double s : scales_)
    if (!(s > 0.0) || !std::isfinite(s))
      throw ValidationError("RvqQuantizer: scales must be positive");
}

int RvqQuantizer::dim() const { return books_.front()->dim(); }

void RvqQuantizer::quantize(std::span<const double> in, std::span<double> out,
                            std::uint16_t* codes,
                            std::uint64_t /*call_id*/) const {
  const auto d = static_cast<std::size_t>(dim());
  if (in.size() != d || out.size() != d)
    throw SizeError("RvqQuantizer: vector length != dim");
  std::vector<double> residual(in.begin(), in.end());
  std::vector<double> scaled(d), point(d);
  for (std::size_t c = 0; c < d; ++c) out[c] = 0.0;
  for (std::size_t i = 0; i < books_.size(); ++i) {
    const double s = scales_[i];
    for (std::size_t c = 0; c < d; ++c) scaled[c] = residual[c] / s;
    const std::uint32_t word = books_[i]->encode(scaled);
    books_[i]->decode(word, point);
    for (std::size_t c = 0; c < d; ++c) {
      const double delta = s * point[c];
      out[c] += delta;
      residual[c] -= delta;
    }
    if (codes) codes[i] = static_cast<std::uint16_t>(word);
  }
}

void RvqQuantizer::decode(std::span<const std::uint16_t> codes,
                          std::span<double> out) const {
  const auto d = static_cast<std::size_t>(dim());
  if (codes.size() != books_.size())
    throw SizeError("RvqQuantizer::decode: one code per stage required");
  if (out.size() != d) throw SizeError("RvqQuantizer::decode: bad length");
  std::vector<double> point(d);
  for (std::size_t c = 0; c < d; ++c) out[c] = 0.0;
  for (std::size_t i = 0; i < books_.size(); ++i) {
    books_[i]->decode(codes[i], point);
    for (std::size_t c = 0; c < d; ++c) out[c] += scales_[i] * point[c];
  }
}

std::vector<std::uint16_t> rvq_quantize(const RvqScheme& scheme,
                                        std::span<const double> v,
                                        const std::vector<double>& scales) {
  RvqQuantizer q(scheme, scales);
  std::vector<double> out(v.size());
  std::vector<std::uint16_t> codes(scheme.size());
  q.quantize(v, out, codes.data(), 0);
  return codes;
}

std::vector<double> rvq_decode(const RvqScheme& scheme,
                               std::span<const std::uint16_t> codes,
                               const std::vector<double>& scales) {
  RvqQuantizer q(scheme, scales);
  std::vector<double> out(static_cast<std::size_t>(q.dim()));
  q.decode(codes, out);
  return out;
}

}  // namespace latq
