#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latq/e8p.hpp"

namespace latq {

// A finite vector codebook over dimension d with 2^(bits * d) entries.
// Codewords are dense indices in [0, size); `code_bits` is the packed width
// used in serialized artifacts.
class Codebook {
 public:
  virtual ~Codebook() = default;

  const std::string& id() const { return id_; }
  int dim() const { return dim_; }
  double bits() const { return bits_; }  // bits per weight
  int code_bits() const { return code_bits_; }
  std::size_t size() const { return size_; }

  // Nearest entry under squared Euclidean distance; ties break toward the
  // numerically smallest codeword.
  virtual std::uint32_t encode(std::span<const double> v) const = 0;
  virtual void decode(std::uint32_t code, std::span<double> out) const = 0;

  // Squared distance to the nearest entry.  Overridden where a faster
  // distance-only path exists.
  virtual double sq_error(std::span<const double> v) const;

  // Root mean square of all table elements; used to center scale searches.
  double element_rms() const { return element_rms_; }

 protected:
  Codebook(std::string id, int dim, double bits, int code_bits,
           std::size_t size);

  std::string id_;
  int dim_;
  double bits_;
  int code_bits_;
  std::size_t size_;
  double element_rms_ = 1.0;
};

// Explicit entry table with exhaustive encode.
class TableCodebook : public Codebook {
 public:
  TableCodebook(std::string id, int dim, double bits, int code_bits,
                Eigen::MatrixXd entries);

  const Eigen::MatrixXd& entries() const { return entries_; }

  std::uint32_t encode(std::span<const double> v) const override;
  void decode(std::uint32_t code, std::span<double> out) const override;
  double sq_error(std::span<const double> v) const override;

 private:
  Eigen::MatrixXd entries_;  // size x dim, row per codeword
};

// The 16-bit two-bits-per-weight E8 codebook (id "e8p-2bit").
class E8pCodebook : public Codebook {
 public:
  E8pCodebook();
  std::uint32_t encode(std::span<const double> v) const override;
  void decode(std::uint32_t code, std::span<double> out) const override;
  double sq_error(std::span<const double> v) const override;

 private:
  const E8PTables& tables_;
};

enum class LatticeFamily { d4, e8, half_grid };

// Table of the 2^(bits * d) smallest-norm points of the lattice, grown by
// increasing the squared radius; within a radius shell the points are
// ordered lexicographically by their doubled coordinates.
//   d4:        integer vectors with even coordinate sum (d = 4);
//   e8:        integers or all-half-integers with even sum (d = 8);
//   half_grid: (Z + 1/2)^d, no sum constraint.
TableCodebook build_lattice_ball(LatticeFamily family, int dim, int bits);

// Registry lookup with caching.  Known ids: "e8p-2bit", "e8-1bit",
// "d4-2bit", and "grid-<k>bit" for k in 1..16 (the scalar half-integer
// grid with 2^k levels).  Unknown ids throw ValidationError.
std::shared_ptr<const Codebook> make_codebook(std::string_view id);

struct MseResult {
  double mse = 0.0;    // per-element squared error at the chosen scale
  double scale = 0.0;  // s minimizing MSE of s * decode(encode(v / s))
  double se = 0.0;     // Monte Carlo standard error of the MSE estimate
};

// Quantizes `num_samples` i.i.d. standard Gaussian d-vectors and reports
// the minimized per-element MSE.  The scale search is golden-section over
// [0.1, 10] x element_rms-normalized units with absolute tolerance 1e-4 (in
// the same units), run on a subsample; the returned MSE and its standard
// error are then evaluated on the full sample set at the chosen scale.
MseResult codebook_mse(const Codebook& cb, std::size_t num_samples,
                       std::uint64_t seed, int threads = 1);

}  // namespace latq
