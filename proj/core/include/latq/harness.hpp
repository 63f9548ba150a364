#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "latq/transforms.hpp"

namespace latq {

// Synthetic Hessian families.  `kind` strings: "identity", "ar1" (param =
// correlation tau, default 0.9), "wishart" (param = sample count N, default
// 2n; a 1e-6 * mean-diagonal ridge keeps the result comfortably PD).
Eigen::MatrixXd gen_hessian(std::size_t n, const std::string& kind,
                            double param, std::uint64_t seed);

// Synthetic weights: "gaussian", or "student" with param = degrees of
// freedom (default 3), normalized to unit variance.
Eigen::MatrixXd gen_weights(std::size_t m, std::size_t n,
                            const std::string& kind, double param,
                            std::uint64_t seed);

// Parses "ar1:0.9" style specs into kind + param (param 0 when absent).
void parse_family(const std::string& spec, std::string& kind, double& param);

// Finished experiment: the full JSON document plus a flat CSV of the row
// table (headers included) ready for plotting.  `passed` reflects every
// in-run assertion.
struct ExperimentReport {
  std::string id;
  std::uint64_t seed = 0;
  std::string timestamp;
  bool passed = true;
  std::string json;
  std::string csv;
};

struct MseSweepConfig {
  std::vector<std::string> codebooks{"e8p-2bit", "d4-2bit", "grid-2bit"};
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string timestamp;  // empty: current UTC time
};

// Gaussian codebook MSE at optimized scale, per codebook.  Asserts the
// 2-bit ordering e8p < d4 < grid (when all three are present) with a
// 3-standard-error margin, and mse < 1e-6 for any 16-bit grid entry.
ExperimentReport run_mse_sweep(const MseSweepConfig& cfg);

struct ConcentrationConfig {
  std::vector<std::size_t> sizes{256, 1024};
  std::size_t trials = 200;
  double delta = 0.05;
  std::vector<std::string> hessians{"ar1:0.9", "wishart"};
  std::vector<TransformKind> transforms{TransformKind::rht,
                                        TransformKind::rfft};
  std::uint64_t seed = 0;
  int threads = 1;
  std::string timestamp;
};

// Incoherence concentration study.  For each (n, hessian, transform) cell,
// draws fresh transforms over `trials` seeds and measures the rotated
// Hessian's eigenvector incoherence and the rotated weights' max-entry
// incoherence against the probabilistic bounds at confidence delta.
// Asserts empirical mu_h exceedance <= delta per cell.
//
// The per-trial mu_h uses the identity that conjugating by an orthogonal T
// maps eigenvectors Q to T Q: one eigendecomposition per (n, hessian) cell
// serves every trial.
ExperimentReport run_concentration(const ConcentrationConfig& cfg);

struct RoundingTableConfig {
  std::size_t m = 64;
  std::size_t n = 64;
  std::size_t seeds = 3;
  std::string hessian = "wishart";
  std::uint64_t seed = 0;
  int threads = 1;
  std::string timestamp;
};

// Adaptive rounding vs nearest rounding across bitrates {2, 3, 4} on
// synthetic layers.  Asserts per seed: proxy loss strictly decreases with
// the bitrate (for the adaptive method), adaptive <= nearest on average,
// and that both methods produce identical codes under an identity Hessian.
ExperimentReport run_rounding_table(const RoundingTableConfig& cfg);

struct BoundStudyConfig {
  std::size_t n = 64;
  std::size_t m = 32;
  int g = 8;
  std::size_t runs = 100;
  std::string hessian = "wishart";
  std::uint64_t seed = 0;
  int threads = 1;
  std::string timestamp;
};

// Worst-case bound study for adaptive rounding with the unbiased stochastic
// grid quantizer (per-entry variance 1/4) on one fixed rotated (W, H) pair:
// `runs` independent rounding draws, mean proxy loss compared against the
// closed-form bound.  Asserts mean <= bound.  Also reports (without
// asserting) the deterministic E8P pipeline's proxy/bound ratio.
ExperimentReport run_error_bound_study(const BoundStudyConfig& cfg);

}  // namespace latq
