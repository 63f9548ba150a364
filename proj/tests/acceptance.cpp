// Acceptance gate: twelve end-to-end checks, one [PASS]/[FAIL] line each.
//
//   usage: acceptance [criterion-number] [threads]
//
// With no arguments all criteria run; the exit code is the number of
// failures.  Each check re-derives its expectations independently of the
// library where that is feasible (fresh enumerations, dense oracles,
// exhaustive scans) so a library regression cannot hide behind itself.

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "latq/codebook.hpp"
#include "latq/e8p.hpp"
#include "latq/errors.hpp"
#include "latq/fwht.hpp"
#include "latq/hadamard.hpp"
#include "latq/harness.hpp"
#include "latq/ldlq.hpp"
#include "latq/parallel.hpp"
#include "latq/pipeline.hpp"
#include "latq/rfft.hpp"
#include "latq/rng.hpp"
#include "latq/rvq.hpp"
#include "latq/transforms.hpp"

namespace {

int g_threads = 1;

struct Outcome {
  bool passed = false;
  std::string summary;           // one-line result description
  std::vector<std::string> details;  // printed indented on failure (or not)
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

std::string vec_to_string(std::span<const double> v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i)
    os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

// --- criterion 1: the reference worked example for the 16-bit codebook ---
//
// The documented example decodes word 0001010110010111 against table row
// 21 and states both the row, (1,1,1,3,1,1,1,1)/2, and the decoded vector,
// (-1/4, -3/4, 3/4, 7/4, -1/4, 3/4, -1/4, -1/4).  Neither statement is
// consistent with the codebook's own construction: lexicographic
// enumeration puts (1,1,1,1,3,1,3,3)/2 at row 21, and no decodable vector
// can contain both -3/4 and -1/4 entries off by a whole unit like that
// (every output is a +-half-odd-integer pattern plus a global +-1/4, so
// all entries share one residue mod 1/2).  The check is implemented
// faithfully and is expected to fail; the implementation follows the
// construction, not the worked example.
Outcome criterion_1() {
  Outcome out;
  const latq::E8PTables& t = latq::e8p_tables();

  const std::array<std::int8_t, 8> stated_row = {1, 1, 1, 3, 1, 1, 1, 1};
  const std::array<double, 8> stated_vec = {-0.25, -0.75, 0.75, 1.75,
                                            -0.25, 0.75,  -0.25, -0.25};
  std::array<double, 8> got{};
  latq::e8p_decode(t, 0b0001010110010111, got);

  const bool row_matches = t.doubled[21] == stated_row;
  const bool vec_matches =
      std::equal(got.begin(), got.end(), stated_vec.begin());
  out.passed = row_matches && vec_matches;
  out.summary = "decode(0001010110010111) reproduces the reference example";
  if (!out.passed) {
    std::array<double, 8> have_row{}, want_row{};
    for (int c = 0; c < 8; ++c) {
      have_row[c] = t.doubled[21][c] / 2.0;
      want_row[c] = stated_row[c] / 2.0;
    }
    out.details.push_back("table row 21: " + vec_to_string(have_row) +
                          "; example states " + vec_to_string(want_row));
    out.details.push_back("decoded:      " + vec_to_string(got));
    out.details.push_back("example says: " + vec_to_string(stated_vec) +
                          " (entry 1 differs by 1/2: not a codebook point)");
    out.details.push_back(
        "the example is internally inconsistent with the construction; the "
        "library follows the construction");
  }
  return out;
}

// --- criterion 2: table construction counts and the 29 fixed tail rows ---
Outcome criterion_2() {
  Outcome out;
  const latq::E8PTables t = latq::build_e8p();

  // Independent enumeration of {1,3,5}^8 with sum of squares <= 40.
  std::vector<std::array<std::int8_t, 8>> want;
  for (int mask = 0; mask < 6561; ++mask) {  // base-3 digits
    std::array<std::int8_t, 8> row{};
    int m = mask, n2 = 0;
    for (int c = 0; c < 8; ++c) {
      row[c] = std::int8_t(1 + 2 * (m % 3));
      n2 += row[c] * row[c];
      m /= 3;
    }
    if (n2 <= 40) want.push_back(row);
  }
  std::sort(want.begin(), want.end());

  static const std::int8_t kTail[29][8] = {
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
      {3, 3, 1, 1, 3, 3, 3, 1}};

  bool ok = want.size() == 227;
  for (std::size_t i = 0; ok && i < 227; ++i) ok = t.doubled[i] == want[i];
  for (int i = 0; ok && i < 29; ++i)
    for (int c = 0; c < 8; ++c)
      ok = ok && t.doubled[227 + i][c] == kTail[i][c];

  out.passed = ok;
  out.summary = fmt(
      "pattern table: %zu norm-bounded rows enumerated (want 227), tail of "
      "29 fixed rows verbatim, 256 total",
      want.size());
  return out;
}

// --- criterion 3: fast encode is exactly an exhaustive 2^16 search ---
Outcome criterion_3() {
  Outcome out;
  const latq::E8PTables& t = latq::e8p_tables();

  // Decode every word once; the scan then uses the same left-to-right
  // accumulation the encoder uses internally.
  std::vector<std::array<double, 8>> table(65536);
  for (std::uint32_t w = 0; w < 65536; ++w)
    latq::e8p_decode(t, std::uint16_t(w), table[w]);

  const std::size_t samples = 10000;
  std::atomic<std::size_t> mismatches{0};
  latq::parallel_chunks(
      samples, 64, g_threads, [&](std::size_t, std::size_t b, std::size_t e) {
        latq::Rng rng(0);
        std::array<double, 8> v{}, dec{};
        std::size_t local = 0;
        for (std::size_t s = b; s < e; ++s) {
          latq::Rng sub = rng.substream(s);
          for (double& x : v) x = sub.gaussian();

          double best = 1e300;
          for (std::uint32_t w = 0; w < 65536; ++w) {
            double d = 0.0;
            for (int c = 0; c < 8; ++c) {
              const double diff = v[std::size_t(c)] - table[w][std::size_t(c)];
              d += diff * diff;
            }
            if (d < best) best = d;
          }

          const std::uint16_t enc = latq::e8p_encode(t, v);
          latq::e8p_decode(t, enc, dec);
          double enc_d = 0.0;
          for (int c = 0; c < 8; ++c) {
            const double diff = v[std::size_t(c)] - dec[std::size_t(c)];
            enc_d += diff * diff;
          }
          if (enc_d != best) ++local;
        }
        mismatches += local;
      });

  out.passed = mismatches == 0;
  out.summary = fmt(
      "fast encode distance equals exhaustive 65536-word scan on all %zu "
      "Gaussian vectors (%zu mismatches)",
      samples, mismatches.load());
  return out;
}

// --- criterion 4: codebook MSE ordering with Monte Carlo significance ---
Outcome criterion_4() {
  Outcome out;
  const std::size_t samples = 1000000;
  const auto mse = [&](const char* id, std::uint64_t seed) {
    return latq::codebook_mse(*latq::make_codebook(id), samples, seed,
                              g_threads);
  };
  const latq::MseResult e8p = mse("e8p-2bit", 41);
  const latq::MseResult d4 = mse("d4-2bit", 42);
  const latq::MseResult grid = mse("grid-2bit", 43);

  const auto gap_z = [](const latq::MseResult& lo,
                        const latq::MseResult& hi) {
    return (hi.mse - lo.mse) / std::sqrt(lo.se * lo.se + hi.se * hi.se);
  };
  const double z1 = gap_z(e8p, d4), z2 = gap_z(d4, grid);
  out.passed = z1 > 3.0 && z2 > 3.0;
  out.summary = fmt(
      "2-bit MSE ordering on %zu samples: e8p %.5f < d4 %.5f < grid %.5f "
      "(gap z-scores %.1f, %.1f; need > 3)",
      samples, e8p.mse, d4.mse, grid.mse, z1, z2);
  return out;
}

// --- criterion 5: incoherence tail probabilities under both transforms ---
Outcome criterion_5() {
  Outcome out;
  latq::ConcentrationConfig cfg;  // defaults: {256,1024} x 200 trials
  cfg.seed = 51;
  cfg.threads = g_threads;
  cfg.timestamp = "-";
  const latq::ExperimentReport rep = latq::run_concentration(cfg);

  // Largest observed exceedance rate, from the CSV rows.
  double worst = 0.0;
  std::istringstream csv(rep.csv);
  std::string line;
  std::getline(csv, line);  // header: ...,exceed_rate_h,...
  int idx = 0;
  {
    std::istringstream hs(line);
    std::string col;
    for (int i = 0; std::getline(hs, col, ','); ++i)
      if (col == "exceed_rate_h") idx = i;
  }
  while (std::getline(csv, line)) {
    std::istringstream ls(line);
    std::string col;
    for (int i = 0; std::getline(ls, col, ','); ++i)
      if (i == idx) worst = std::max(worst, std::stod(col));
  }

  out.passed = rep.passed;
  out.summary = fmt(
      "transform incoherence: exceedance of the sqrt(2 ln(2 n^2/0.05)) "
      "bound <= 0.05 in all 8 cells (worst observed %.3f, 200 trials each)",
      worst);
  return out;
}

// --- criterion 6: block factorization accuracy over random PSD inputs ---
Outcome criterion_6() {
  Outcome out;
  latq::Rng root(61);
  double worst = 0.0;
  const int gs[3] = {1, 4, 8};
  for (int i = 0; i < 50; ++i) {
    const int g = gs[i % 3];
    latq::Rng inst = root.substream(std::uint64_t(i));
    // Random multiple of g up to 512.
    const std::size_t n =
        std::size_t(g) * (1 + inst.next_u64() % (512 / std::size_t(g)));
    const Eigen::MatrixXd h = latq::gen_hessian(
        n, i % 2 ? "wishart" : "ar1", i % 2 ? 0.0 : 0.5 + 0.49 * inst.uniform(),
        inst.substream(1).seed());
    const latq::BlockLdl f = latq::block_ldl(h, g);
    const double rel = (h - f.l.transpose() * f.d * f.l).norm() / h.norm();
    worst = std::max(worst, rel);
  }
  out.passed = worst < 1e-6;
  out.summary = fmt(
      "block factorization H = L^T D L on 50 PSD instances (n <= 512, g in "
      "{1,4,8}): worst relative error %.2e (need < 1e-6)",
      worst);
  return out;
}

// --- criterion 7: adaptive rounding dominates nearest rounding ---
Outcome criterion_7() {
  Outcome out;
  const std::size_t instances = 100;
  std::vector<double> adaptive(instances), nearest(instances);
  latq::parallel_chunks(
      instances, 25, g_threads,
      [&](std::size_t, std::size_t b, std::size_t e) {
        latq::Rng root(71);
        for (std::size_t i = b; i < e; ++i) {
          latq::Rng inst = root.substream(i);
          const Eigen::MatrixXd w =
              latq::gen_weights(64, 64, "gaussian", 0.0, inst.substream(0).seed());
          const Eigen::MatrixXd h =
              latq::gen_hessian(64, "wishart", 0.0, inst.substream(1).seed());
          const latq::IncoherentLayer layer =
              latq::ip_rht(w, h, inst.substream(2).seed());

          const latq::RvqScheme scheme = latq::default_scheme(2);
          const double r1 =
              layer.w_hat.norm() / std::sqrt(double(64 * 64));
          std::vector<double> scales = latq::stage_scales(scheme, r1);
          for (double& s : scales) s = double(float(s));
          const latq::RvqQuantizer q(scheme, scales);

          adaptive[i] =
              latq::block_ldlq(layer.w_hat, layer.h_hat, q, 8, 1)
                  .report.proxy_loss;
          nearest[i] =
              latq::nearest_round(layer.w_hat, q, 8, &layer.h_hat, 1)
                  .report.proxy_loss;
        }
      });

  std::size_t wins = 0;
  double sum_a = 0.0, sum_n = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    wins += adaptive[i] <= nearest[i];
    sum_a += adaptive[i];
    sum_n += nearest[i];
  }
  out.passed = wins >= 95 && sum_a < sum_n;
  out.summary = fmt(
      "adaptive block rounding beats plain nearest on %zu/%zu instances "
      "(need >= 95), mean proxy loss %.1f vs %.1f",
      wins, instances, sum_a / double(instances), sum_n / double(instances));
  return out;
}

// --- criterion 8: stochastic rounding stays under the analytic bound ---
Outcome criterion_8() {
  Outcome out;
  latq::BoundStudyConfig cfg;  // defaults: n=64, m=32, g=8, 100 runs
  cfg.seed = 81;
  cfg.threads = g_threads;
  cfg.timestamp = "-";
  const latq::ExperimentReport rep = latq::run_error_bound_study(cfg);

  double mean = 0.0, bound = 0.0;
  {
    const std::string& j = rep.json;
    auto grab = [&](const char* key) {
      const auto pos = j.find(std::string("\"") + key + "\": ");
      return std::stod(j.substr(pos + std::strlen(key) + 4));
    };
    mean = grab("mean_proxy");
    bound = grab("bound");
  }
  out.passed = rep.passed;
  out.summary = fmt(
      "stochastic grid rounding (variance 1/4): mean proxy loss %.2f over "
      "100 runs <= worst-case bound %.2f",
      mean, bound);
  return out;
}

// --- criterion 9: proxy loss strictly decreases with preset bitrate ---
Outcome criterion_9() {
  Outcome out;
  const Eigen::MatrixXd w = latq::gen_weights(64, 64, "gaussian", 0.0, 91);
  const Eigen::MatrixXd h = latq::gen_hessian(64, "wishart", 0.0, 92);
  double losses[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    latq::QuantConfig cfg;
    cfg.bits = 2 + i;
    cfg.seed = 93;
    cfg.threads = g_threads;
    losses[i] = latq::quantize_layer(w, h, cfg).report.proxy_loss;
  }
  out.passed = losses[2] < losses[1] && losses[1] < losses[0];
  out.summary = fmt(
      "fixed layer, rising bitrate: proxy loss %.2f (2-bit) > %.2f (3-bit) "
      "> %.2f (4-bit)",
      losses[0], losses[1], losses[2]);
  return out;
}

// --- criterion 10: streaming inference equals dense reconstruction ---
Outcome criterion_10() {
  Outcome out;
  double worst = 0.0;
  for (int bits : {2, 3, 4}) {
    latq::QuantConfig cfg;
    cfg.bits = bits;
    cfg.seed = 101;
    cfg.threads = g_threads;
    const latq::QuantizedLinear a =
        latq::quantize_layer(
            latq::gen_weights(64, 64, "gaussian", 0.0, 102),
            latq::gen_hessian(64, "wishart", 0.0, 103), cfg)
            .artifact;
    const Eigen::MatrixXd w_tilde = latq::dequantize_layer(a);
    latq::Rng rng(104);
    for (int t = 0; t < 32; ++t) {
      Eigen::VectorXd x{64};
      for (long i = 0; i < 64; ++i) x[i] = rng.gaussian();
      x /= x.norm();
      const Eigen::VectorXd y = latq::infer(a, x);
      const Eigen::VectorXd want = w_tilde * x;
      worst = std::max(worst, (y - want).norm() / want.norm());
    }
  }
  out.passed = worst < 1e-4;
  out.summary = fmt(
      "streamed inference vs dense reconstruction on 32 unit inputs per "
      "bitrate: worst relative error %.2e (need < 1e-4)",
      worst);
  return out;
}

// --- criterion 11: serialization idempotence and storage overhead ---
Outcome criterion_11() {
  Outcome out;
  latq::QuantizedLinear a;
  a.m = 4096;
  a.n = 4096;
  a.transform = latq::TransformKind::rht;
  a.stages = {{"e8p-2bit", 0.87f}};
  latq::Rng rng(111);
  a.left_signs = latq::SignVector::random(4096, rng);
  a.right_signs = latq::SignVector::random(4096, rng);
  a.codes.resize(1);
  a.codes[0].resize(4096 * 512);
  for (auto& c : a.codes[0]) c = std::uint16_t(rng.next_u64() & 0xFFFF);

  const std::vector<std::uint8_t> bytes1 = latq::serialize(a);
  const latq::QuantizedLinear b = latq::deserialize(bytes1);
  const std::vector<std::uint8_t> bytes2 = latq::serialize(b);
  const double bpw = latq::bits_per_weight(a);

  out.passed = bytes1 == bytes2 && b == a && bpw < 2.01;
  out.summary = fmt(
      "4096 x 4096 2-bit artifact: round trip byte-identical (%zu bytes), "
      "%.5f bits per weight (need < 2.01)",
      bytes1.size(), bpw);
  return out;
}

// --- criterion 12: transform building blocks against dense oracles ---
Outcome criterion_12() {
  Outcome out;
  bool ok = true;
  std::string why;

  // Walsh-Hadamard: involution and norm preservation up to 2^16.
  for (std::size_t n = 1; n <= (1u << 16); n *= 2) {
    latq::Rng rng(n);
    std::vector<double> v(n);
    for (double& x : v) x = rng.gaussian();
    std::vector<double> w = v;
    latq::fwht(w);
    double e_in = 0.0, e_out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e_in += v[i] * v[i];
      e_out += w[i] * w[i];
    }
    latq::fwht(w);
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      diff = std::max(diff, std::fabs(w[i] - v[i]));
    if (std::fabs(e_out / e_in - 1.0) > 1e-10 || diff > 1e-9) {
      ok = false;
      why = fmt("fwht failed at n=%zu", n);
      break;
    }
  }

  // Kronecker fast path vs the dense matrix at mixed sizes.
  for (const std::size_t n : {24u, 56u}) {
    if (!ok) break;
    const latq::HadamardSpec spec = latq::plan_hadamard(n);
    const Eigen::MatrixXd t = latq::dense_hadamard(spec);
    latq::Rng rng(1000 + n);
    Eigen::VectorXd v{long(n)};
    for (long i = 0; i < v.size(); ++i) v[i] = rng.gaussian();
    std::vector<double> fast(v.data(), v.data() + n);
    latq::had_apply(spec, fast, false);
    const Eigen::VectorXd want = t * v;
    for (std::size_t i = 0; i < n; ++i)
      if (std::fabs(fast[i] - want[long(i)]) > 1e-10) {
        ok = false;
        why = fmt("kronecker apply mismatch at n=%zu", n);
      }
    const double orth =
        (t.transpose() * t - Eigen::MatrixXd::Identity(long(n), long(n)))
            .cwiseAbs()
            .maxCoeff();
    if (orth > 1e-10) {
      ok = false;
      why = fmt("dense transform not orthogonal at n=%zu", n);
    }
  }

  // Phase-rotated DFT orthogonality.
  for (const std::size_t n : {8u, 100u}) {
    if (!ok) break;
    latq::Rng rng(2000 + n);
    const latq::PhaseVector p = latq::PhaseVector::random(n, rng);
    const Eigen::MatrixXd t = latq::dense_rfft(p);
    const double orth =
        (t.transpose() * t - Eigen::MatrixXd::Identity(long(n), long(n)))
            .cwiseAbs()
            .maxCoeff();
    if (orth > 1e-9) {
      ok = false;
      why = fmt("phase transform not orthogonal at n=%zu", n);
    }
  }

  out.passed = ok;
  out.summary =
      ok ? std::string(
               "fast Walsh involution/orthogonality up to 65536, Kronecker "
               "path vs dense at n in {24,56}, phase-rotated DFT "
               "orthogonality at n in {8,100}")
         : why;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  const unsigned hw = std::thread::hardware_concurrency();
  g_threads = int(std::min(hw == 0 ? 1u : hw, 8u));
  if (argc > 2) g_threads = std::max(1, std::atoi(argv[2]));

  const std::function<Outcome()> criteria[12] = {
      criterion_1, criterion_2, criterion_3,  criterion_4,
      criterion_5, criterion_6, criterion_7,  criterion_8,
      criterion_9, criterion_10, criterion_11, criterion_12};

  int failures = 0;
  for (int i = 1; i <= 12; ++i) {
    if (only != 0 && i != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i - 1]();
    } catch (const std::exception& e) {
      out.passed = false;
      out.summary = std::string("threw: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("[%s] criterion %d: %s (%.1f s)\n",
                out.passed ? "PASS" : "FAIL", i, out.summary.c_str(), secs);
    for (const std::string& d : out.details)
      std::printf("       %s\n", d.c_str());
    failures += out.passed ? 0 : 1;
  }
  return failures;
}
