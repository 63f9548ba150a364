#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "latq/quantizer.hpp"

namespace latq {

// One residual stage: a codebook id plus its coverage factor rho.  The
// absolute stage scale is s_i = r1 / rho_i, where r1 is the RMS entry of
// the (first-stage) matrix being quantized, so larger rho means a finer
// grid relative to the data.
struct RvqStage {
  std::string codebook;
  double rho = 1.0;
};
using RvqScheme = std::vector<RvqStage>;

// Built-in bitrate presets.  2-bit: single coarse stage; 3-bit: 2-bit stage
// plus a 1-bit refinement; 4-bit: two 2-bit stages.  Coverage factors are
// tuned for unit-variance Gaussian data.
RvqScheme default_scheme(int bits);

// Total bits per weight of the scheme (sum of stage codebook rates).
double scheme_bits(const RvqScheme& scheme);

// s_i = r1 / rho_i.  A non-positive r1 (identically zero input) falls back
// to s_i = 1 so downstream arithmetic stays finite.
std::vector<double> stage_scales(const RvqScheme& scheme, double r1);

// Residual cascade over a fixed scheme: stage i quantizes what stages
// 0..i-1 left behind, each with its own codebook and scale.
class RvqQuantizer final : public VectorQuantizer {
 public:
  RvqQuantizer(const RvqScheme& scheme, std::vector<double> scales);

  int dim() const override;
  int stages() const override { return static_cast<int>(books_.size()); }
  void quantize(std::span<const double> in, std::span<double> out,
                std::uint16_t* codes, std::uint64_t call_id) const override;

  // out = sum_i s_i * decode_i(code_i)
  void decode(std::span<const std::uint16_t> codes,
              std::span<double> out) const;

  const std::vector<std::shared_ptr<const Codebook>>& codebooks() const {
    return books_;
  }
  const std::vector<double>& scales() const { return scales_; }

 private:
  std::vector<std::shared_ptr<const Codebook>> books_;
  std::vector<double> scales_;
};

// Free-function forms operating directly on a scheme.
std::vector<std::uint16_t> rvq_quantize(const RvqScheme& scheme,
                                        std::span<const double> v,
                                        const std::vector<double>& scales);
std::vector<double> rvq_decode(const RvqScheme& scheme,
                               std::span<const std::uint16_t> codes,
                               const std::vector<double>& scales);

}  // namespace latq
