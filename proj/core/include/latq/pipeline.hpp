#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "latq/bitpack.hpp"
#include "latq/ldlq.hpp"
#include "latq/rvq.hpp"
#include "latq/transforms.hpp"
#include "latq/version.hpp"

namespace latq {

struct QuantConfig {
  int bits = 2;                                  // preset scheme selector
  int g = 8;                                     // rounding block size
  TransformKind transform = TransformKind::rht;
  std::uint64_t seed = 0;
  double hessian_eps = 0.0;  // extra ridge: eps * mean(diag) added to H_hat
  int threads = 1;
};

struct StageInfo {
  std::string codebook;
  float scale = 1.0f;  // frozen at single precision before quantization

  bool operator==(const StageInfo&) const = default;
};

// A quantized linear layer: everything needed to reconstruct the weights
// or to apply them to activations.  Per stage there are m * (n/g) packed
// codewords in row-major order; the only other payload is the transform
// randomness (m + n sign bits, or m/2 + n/2 single-precision phases).
struct QuantizedLinear {
  std::uint16_t version = kFormatVersion;
  std::uint32_t m = 0;
  std::uint32_t n = 0;
  TransformKind transform = TransformKind::rht;
  std::vector<StageInfo> stages;
  SignVector left_signs, right_signs;    // rht
  PhaseVector left_phases, right_phases; // rfft
  std::vector<std::vector<std::uint16_t>> codes;  // [stage][row * nb + blk]

  bool operator==(const QuantizedLinear&) const = default;
};

struct QuantizeOutput {
  QuantizedLinear artifact;
  RoundingReport report;
  double incoherence_w = 0.0;  // measured on the rotated W
  double incoherence_h = 0.0;  // measured on the rotated H
  double r1 = 0.0;             // RMS entry of the rotated W
};

// Full pipeline: rotate (W, H) into the incoherent domain, freeze the
// residual-stage scales off the rotated W's RMS, and adaptively round with
// block feedback.  n and m must be transformable (and n divisible by the
// scheme's codeword dimension, which must equal cfg.g).
QuantizeOutput quantize_layer(const Eigen::MatrixXd& w,
                              const Eigen::MatrixXd& h,
                              const QuantConfig& cfg);

// Decodes all stages and undoes the rotation: returns T_u^T W_hat T_v.
Eigen::MatrixXd dequantize_layer(const QuantizedLinear& artifact);

// y = W_tilde x without materializing W_tilde: rotate x, stream one decoded
// block at a time (O(m + n + g) working memory beyond the artifact), rotate
// the result back.
Eigen::VectorXd infer(const QuantizedLinear& artifact,
                      const Eigen::VectorXd& x);

// Artifact bytes, little-endian:
//   "QSHP" | u16 version | u32 m | u32 n | u8 transform | u8 stage_count
//   per stage: u8 id_len | id bytes | f32 scale
//   transform payload: packed sign bits for both sides (rht) or f32 phase
//     arrays (rfft)
//   per stage: m * (n/g) codewords, each code_bits/8 bytes
std::vector<std::uint8_t> serialize(const QuantizedLinear& artifact);
void serialize(const QuantizedLinear& artifact, std::ostream& os);
QuantizedLinear deserialize(std::span<const std::uint8_t> bytes);
QuantizedLinear deserialize(std::istream& is);

std::size_t serialized_size(const QuantizedLinear& artifact);

// 8 * serialized_size / (m * n): total storage cost per weight, including
// sign vectors and header.
double bits_per_weight(const QuantizedLinear& artifact);

// Rebuilds the rounding quantizer an artifact was produced with.
RvqQuantizer artifact_quantizer(const QuantizedLinear& artifact);

// The g used by the artifact (the stage codebooks' shared dimension).
int artifact_block_dim(const QuantizedLinear& artifact);

}  // namespace latq
