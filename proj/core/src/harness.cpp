#include "latq/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

#include <json.hpp>

#include "latq/codebook.hpp"
#include "latq/errors.hpp"
#include "latq/parallel.hpp"
#include "latq/pipeline.hpp"
#include "latq/rng.hpp"

namespace latq {
namespace {

using ojson = nlohmann::ordered_json;

std::string iso_timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string csv_cell(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

ExperimentReport finish_report(const std::string& id, std::uint64_t seed,
                               const std::string& timestamp, ojson config,
                               const std::vector<ojson>& rows,
                               const std::vector<ojson>& assertions) {
  ExperimentReport rep;
  rep.id = id;
  rep.seed = seed;
  rep.timestamp = timestamp.empty() ? iso_timestamp_utc() : timestamp;
  rep.passed = true;
  for (const ojson& a : assertions)
    if (!a.at("passed").get<bool>()) rep.passed = false;

  ojson doc;
  doc["experiment"] = id;
  doc["version"] = kVersionString;
  doc["seed"] = seed;
  doc["timestamp"] = rep.timestamp;
  doc["config"] = std::move(config);
  doc["rows"] = rows;
  doc["assertions"] = assertions;
  doc["passed"] = rep.passed;
  rep.json = doc.dump(2) + "\n";

  // Flat CSV of the row table: header = union of keys in first-seen order.
  std::vector<std::string> headers;
  for (const ojson& row : rows)
    for (auto it = row.begin(); it != row.end(); ++it)
      if (std::find(headers.begin(), headers.end(), it.key()) == headers.end())
        headers.push_back(it.key());
  std::ostringstream csv;
  for (std::size_t i = 0; i < headers.size(); ++i)
    csv << (i ? "," : "") << headers[i];
  csv << "\n";
  for (const ojson& row : rows) {
    for (std::size_t i = 0; i < headers.size(); ++i) {
      if (i) csv << ",";
      if (auto it = row.find(headers[i]); it != row.end())
        csv << csv_cell(*it);
    }
    csv << "\n";
  }
  rep.csv = csv.str();
  return rep;
}

ojson make_assertion(const std::string& name, bool passed, double observed,
                     double threshold) {
  ojson a;
  a["name"] = name;
  a["passed"] = passed;
  a["observed"] = observed;
  a["threshold"] = threshold;
  return a;
}

SideTransform make_side(TransformKind kind, std::size_t n, Rng rng) {
  return kind == TransformKind::rht ? make_rht_side(n, rng)
                                    : make_rfft_side(n, rng);
}

}  // namespace

Eigen::MatrixXd gen_hessian(std::size_t n, const std::string& kind,
                            double param, std::uint64_t seed) {
  if (n == 0) throw SizeError("gen_hessian: n must be positive");
  const auto ni = static_cast<Eigen::Index>(n);
  if (kind == "identity") return Eigen::MatrixXd::Identity(ni, ni);
  if (kind == "ar1") {
    const double tau = param != 0.0 ? param : 0.9;
    if (!(std::fabs(tau) < 1.0))
      throw ValidationError("gen_hessian: ar1 needs |tau| < 1");
    Eigen::MatrixXd h(ni, ni);
    double band = 1.0;
    for (Eigen::Index d = 0; d < ni; ++d) {
      for (Eigen::Index i = 0; i + d < ni; ++i) {
        h(i, i + d) = band;
        h(i + d, i) = band;
      }
      band *= tau;
    }
    return h;
  }
  if (kind == "wishart") {
    const auto samples = static_cast<Eigen::Index>(
        param > 0.0 ? param : 2.0 * static_cast<double>(n));
    Rng rng(seed);
    Eigen::MatrixXd x(ni, samples);
    for (Eigen::Index j = 0; j < samples; ++j)
      for (Eigen::Index i = 0; i < ni; ++i) x(i, j) = rng.gaussian();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(ni, ni);
    h.selfadjointView<Eigen::Lower>().rankUpdate(
        x, 1.0 / static_cast<double>(samples));
    h = h.selfadjointView<Eigen::Lower>();
    h.diagonal().array() += 1e-6 * h.diagonal().mean();
    return h;
  }
  throw ValidationError("gen_hessian: unknown kind '" + kind + "'");
}

Eigen::MatrixXd gen_weights(std::size_t m, std::size_t n,
                            const std::string& kind, double param,
                            std::uint64_t seed) {
  if (m == 0 || n == 0) throw SizeError("gen_weights: empty shape");
  Rng rng(seed);
  Eigen::MatrixXd w(static_cast<Eigen::Index>(m),
                    static_cast<Eigen::Index>(n));
  if (kind == "gaussian") {
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.gaussian();
    return w;
  }
  if (kind == "student") {
    const double nu = param != 0.0 ? param : 3.0;
    if (!(nu > 2.0))
      throw ValidationError("gen_weights: student needs dof > 2");
    const double norm = std::sqrt(nu / (nu - 2.0));
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        w(i, j) = rng.student_t(nu) / norm;
    return w;
  }
  throw ValidationError("gen_weights: unknown kind '" + kind + "'");
}

void parse_family(const std::string& spec, std::string& kind, double& param) {
  const auto colon = spec.find(':');
  kind = spec.substr(0, colon);
  param = 0.0;
  if (kind.empty()) throw ValidationError("empty family spec");
  if (colon != std::string::npos) {
    try {
      std::size_t used = 0;
      param = std::stod(spec.substr(colon + 1), &used);
      if (used != spec.size() - colon - 1)
        throw ValidationError("bad family parameter in '" + spec + "'");
    } catch (const std::exception&) {
      throw ValidationError("bad family parameter in '" + spec + "'");
    }
  }
}

ExperimentReport run_mse_sweep(const MseSweepConfig& cfg) {
  if (cfg.codebooks.empty())
    throw ValidationError("mse sweep: no codebooks given");
  std::vector<ojson> rows;
  std::vector<ojson> assertions;
  Rng root(cfg.seed);

  struct Entry {
    std::string id;
    MseResult res;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < cfg.codebooks.size(); ++i) {
    const auto cb = make_codebook(cfg.codebooks[i]);
    const MseResult res = codebook_mse(*cb, cfg.samples,
                                       root.substream(i).seed(), cfg.threads);
    entries.push_back({cfg.codebooks[i], res});
    ojson row;
    row["codebook"] = cfg.codebooks[i];
    row["dim"] = cb->dim();
    row["bits"] = cb->bits();
    row["samples"] = cfg.samples;
    row["scale"] = res.scale;
    row["mse"] = res.mse;
    row["se"] = res.se;
    rows.push_back(std::move(row));

    if (cfg.codebooks[i].starts_with("grid-16"))
      assertions.push_back(make_assertion("mse(" + cfg.codebooks[i] +
                                              ") < 1e-6",
                                          res.mse < 1e-6, res.mse, 1e-6));
  }

  auto find_entry = [&](const std::string& id) -> const Entry* {
    for (const Entry& e : entries)
      if (e.id == id) return &e;
    return nullptr;
  };
  const Entry* e8p = find_entry("e8p-2bit");
  const Entry* d4 = find_entry("d4-2bit");
  const Entry* grid = find_entry("grid-2bit");
  if (e8p && d4 && grid) {
    auto gap_ok = [](const Entry& lo, const Entry& hi) {
      const double gap = hi.res.mse - lo.res.mse;
      const double se =
          std::sqrt(lo.res.se * lo.res.se + hi.res.se * hi.res.se);
      return std::make_pair(gap > 3.0 * se, gap / (se > 0 ? se : 1.0));
    };
    auto [ok1, z1] = gap_ok(*e8p, *d4);
    auto [ok2, z2] = gap_ok(*d4, *grid);
    assertions.push_back(make_assertion(
        "mse(e8p-2bit) < mse(d4-2bit) by > 3 se", ok1, z1, 3.0));
    assertions.push_back(make_assertion(
        "mse(d4-2bit) < mse(grid-2bit) by > 3 se", ok2, z2, 3.0));
  }

  ojson config;
  config["codebooks"] = cfg.codebooks;
  config["samples"] = cfg.samples;
  config["threads"] = cfg.threads;
  return finish_report("mse-sweep", cfg.seed, cfg.timestamp,
                       std::move(config), rows, assertions);
}

ExperimentReport run_concentration(const ConcentrationConfig& cfg) {
  if (cfg.trials == 0) throw ValidationError("concentration: zero trials");
  std::vector<ojson> rows;
  std::vector<ojson> assertions;
  Rng root(cfg.seed);

  for (std::size_t ni = 0; ni < cfg.sizes.size(); ++ni) {
    const std::size_t n = cfg.sizes[ni];
    const MuBounds bounds = mu_bounds(n, n, cfg.delta);
    // One weight matrix per size, shared across cells.
    const Eigen::MatrixXd w = gen_weights(
        n, n, "gaussian", 0.0, root.substream(3000 + ni).seed());

    for (std::size_t fi = 0; fi < cfg.hessians.size(); ++fi) {
      std::string kind;
      double param = 0.0;
      parse_family(cfg.hessians[fi], kind, param);
      const std::uint64_t h_seed =
          root.substream(1000 + ni * cfg.hessians.size() + fi).seed();
      const Eigen::MatrixXd h = gen_hessian(n, kind, param, h_seed);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
      if (es.info() != Eigen::Success)
        throw NumericalError("concentration: eigendecomposition failed");
      const Eigen::MatrixXd q = es.eigenvectors();

      for (std::size_t ti = 0; ti < cfg.transforms.size(); ++ti) {
        const TransformKind kind_t = cfg.transforms[ti];
        Rng cell = root.substream(
            10000 + (ni * cfg.hessians.size() + fi) * cfg.transforms.size() +
            ti);
        std::vector<double> mu_h(cfg.trials), mu_w(cfg.trials);
        parallel_chunks(
            cfg.trials, std::min<std::size_t>(cfg.trials, kReductionChunks),
            cfg.threads,
            [&](std::size_t, std::size_t begin, std::size_t end) {
              for (std::size_t t = begin; t < end; ++t) {
                Rng trial = cell.substream(t);
                const SideTransform side_v =
                    make_side(kind_t, n, trial.substream(0));
                const SideTransform side_u =
                    make_side(kind_t, n, trial.substream(1));
                Eigen::MatrixXd tq = q;
                transform_cols(side_v, tq);
                mu_h[t] = std::sqrt(static_cast<double>(n)) *
                          tq.cwiseAbs().maxCoeff();
                Eigen::MatrixXd wt = w;
                transform_cols(side_u, wt);
                transform_rows(side_v, wt);
                mu_w[t] = measure_incoherence_w(wt);
              }
            });

        std::size_t exceed_h = 0, exceed_w = 0;
        double sum_h = 0.0, max_h = 0.0;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
          exceed_h += mu_h[t] > bounds.mu_h ? 1 : 0;
          exceed_w += mu_w[t] > bounds.mu_w ? 1 : 0;
          sum_h += mu_h[t];
          max_h = std::max(max_h, mu_h[t]);
        }
        const double rate_h =
            static_cast<double>(exceed_h) / static_cast<double>(cfg.trials);
        const double rate_w =
            static_cast<double>(exceed_w) / static_cast<double>(cfg.trials);

        ojson row;
        row["n"] = n;
        row["hessian"] = cfg.hessians[fi];
        row["transform"] = transform_name(kind_t);
        row["trials"] = cfg.trials;
        row["delta"] = cfg.delta;
        row["mu_h_bound"] = bounds.mu_h;
        row["mean_mu_h"] = sum_h / static_cast<double>(cfg.trials);
        row["max_mu_h"] = max_h;
        row["exceed_rate_h"] = rate_h;
        row["mu_w_bound"] = bounds.mu_w;
        row["exceed_rate_w"] = rate_w;
        rows.push_back(std::move(row));

        assertions.push_back(make_assertion(
            "mu_h exceedance <= delta (n=" + std::to_string(n) + ", " +
                cfg.hessians[fi] + ", " + transform_name(kind_t) + ")",
            rate_h <= cfg.delta, rate_h, cfg.delta));
      }
    }
  }

  ojson config;
  config["sizes"] = cfg.sizes;
  config["trials"] = cfg.trials;
  config["delta"] = cfg.delta;
  config["hessians"] = cfg.hessians;
  std::vector<std::string> tnames;
  for (TransformKind t : cfg.transforms) tnames.push_back(transform_name(t));
  config["transforms"] = tnames;
  config["threads"] = cfg.threads;
  return finish_report("concentration", cfg.seed, cfg.timestamp,
                       std::move(config), rows, assertions);
}

namespace {

struct RoundedPair {
  LdlqResult adaptive;
  LdlqResult nearest;
};

RoundedPair round_both(const Eigen::MatrixXd& w_hat,
                       const Eigen::MatrixXd& h_hat, int bits, int threads) {
  const RvqScheme scheme = default_scheme(bits);
  const double r1 = w_hat.norm() / std::sqrt(static_cast<double>(
                                       w_hat.rows() * w_hat.cols()));
  std::vector<double> scales = stage_scales(scheme, r1);
  for (double& s : scales) s = static_cast<double>(static_cast<float>(s));
  RvqQuantizer q(scheme, scales);
  const int g = q.dim();
  RoundedPair out;
  out.adaptive = block_ldlq(w_hat, h_hat, q, g, threads);
  out.nearest = nearest_round(w_hat, q, g, &h_hat, threads);
  return out;
}

}  // namespace

ExperimentReport run_rounding_table(const RoundingTableConfig& cfg) {
  if (cfg.seeds == 0) throw ValidationError("rounding table: zero seeds");
  std::vector<ojson> rows;
  std::vector<ojson> assertions;
  Rng root(cfg.seed);
  std::string kind;
  double param = 0.0;
  parse_family(cfg.hessian, kind, param);

  double sum_adaptive = 0.0, sum_nearest = 0.0;
  for (std::size_t si = 0; si < cfg.seeds; ++si) {
    const Eigen::MatrixXd w = gen_weights(cfg.m, cfg.n, "gaussian", 0.0,
                                          root.substream(si * 3).seed());
    const Eigen::MatrixXd h =
        gen_hessian(cfg.n, kind, param, root.substream(si * 3 + 1).seed());
    const IncoherentLayer layer =
        ip_rht(w, h, root.substream(si * 3 + 2).seed());

    std::vector<double> proxies;
    for (int bits : {2, 3, 4}) {
      const RoundedPair pair =
          round_both(layer.w_hat, layer.h_hat, bits, cfg.threads);
      for (const char* method : {"blockldlq", "nearest"}) {
        const LdlqResult& res = std::string(method) == "blockldlq"
                                    ? pair.adaptive
                                    : pair.nearest;
        ojson row;
        row["seed_index"] = si;
        row["hessian"] = cfg.hessian;
        row["m"] = cfg.m;
        row["n"] = cfg.n;
        row["bits"] = bits;
        row["method"] = method;
        row["proxy_loss"] = res.report.proxy_loss;
        row["quantizer_calls"] = res.report.quantizer_calls;
        rows.push_back(std::move(row));
      }
      proxies.push_back(pair.adaptive.report.proxy_loss);
      sum_adaptive += pair.adaptive.report.proxy_loss;
      sum_nearest += pair.nearest.report.proxy_loss;
    }
    const bool monotone = proxies[2] < proxies[1] && proxies[1] < proxies[0];
    assertions.push_back(make_assertion(
        "proxy(4) < proxy(3) < proxy(2), seed " + std::to_string(si),
        monotone, proxies[2], proxies[0]));
  }
  assertions.push_back(make_assertion(
      "mean adaptive proxy <= mean nearest proxy",
      sum_adaptive <= sum_nearest, sum_adaptive, sum_nearest));

  // Identity Hessian: feedback vanishes, so the two methods must agree
  // exactly (identical codes).
  {
    const Eigen::MatrixXd w = gen_weights(cfg.m, cfg.n, "gaussian", 0.0,
                                          root.substream(9000).seed());
    const Eigen::MatrixXd eye =
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(cfg.n),
                                  static_cast<Eigen::Index>(cfg.n));
    const RoundedPair pair = round_both(w, eye, 2, cfg.threads);
    const bool equal = pair.adaptive.codes == pair.nearest.codes;
    assertions.push_back(make_assertion(
        "identity Hessian: adaptive == nearest", equal, equal ? 1.0 : 0.0,
        1.0));
  }

  ojson config;
  config["m"] = cfg.m;
  config["n"] = cfg.n;
  config["seeds"] = cfg.seeds;
  config["hessian"] = cfg.hessian;
  config["threads"] = cfg.threads;
  return finish_report("rounding-table", cfg.seed, cfg.timestamp,
                       std::move(config), rows, assertions);
}

ExperimentReport run_error_bound_study(const BoundStudyConfig& cfg) {
  if (cfg.runs == 0) throw ValidationError("bound study: zero runs");
  if (cfg.g <= 0 || cfg.n % static_cast<std::size_t>(cfg.g) != 0)
    throw SizeError("bound study: block size must divide n");
  Rng root(cfg.seed);
  std::string kind;
  double param = 0.0;
  parse_family(cfg.hessian, kind, param);

  const Eigen::MatrixXd w = gen_weights(cfg.m, cfg.n, "gaussian", 0.0,
                                        root.substream(0).seed());
  const Eigen::MatrixXd h =
      gen_hessian(cfg.n, kind, param, root.substream(1).seed());
  const IncoherentLayer layer = ip_rht(w, h, root.substream(2).seed());

  constexpr double kSigma2 = 0.25;
  const double bound = rounding_error_bound(
      layer.h_hat, cfg.g, static_cast<int>(cfg.m), kSigma2);

  std::vector<double> proxies(cfg.runs);
  Rng run_root = root.substream(3);
  parallel_chunks(cfg.runs, std::min<std::size_t>(cfg.runs, kReductionChunks),
                  cfg.threads,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t r = begin; r < end; ++r) {
                      StochasticGridQuantizer q(
                          cfg.g, run_root.substream(r).seed());
                      const LdlqResult res = block_ldlq(
                          layer.w_hat, layer.h_hat, q, cfg.g, 1);
                      proxies[r] = res.report.proxy_loss;
                    }
                  });

  std::vector<ojson> rows;
  double sum = 0.0;
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    sum += proxies[r];
    ojson row;
    row["run"] = r;
    row["proxy_loss"] = proxies[r];
    rows.push_back(std::move(row));
  }
  const double mean = sum / static_cast<double>(cfg.runs);

  std::vector<ojson> assertions;
  assertions.push_back(make_assertion(
      "mean stochastic proxy <= worst-case bound", mean <= bound, mean,
      bound));

  // Deterministic 2-bit pipeline on the same layer, reported for context
  // (the bound's variance assumption does not cover it).
  const RoundedPair det =
      round_both(layer.w_hat, layer.h_hat, 2, cfg.threads);

  ojson config;
  config["n"] = cfg.n;
  config["m"] = cfg.m;
  config["g"] = cfg.g;
  config["runs"] = cfg.runs;
  config["hessian"] = cfg.hessian;
  config["sigma2"] = kSigma2;
  config["bound"] = bound;
  config["mean_proxy"] = mean;
  config["mean_over_bound"] = bound > 0.0 ? mean / bound : 0.0;
  config["e8p_2bit_proxy"] = det.adaptive.report.proxy_loss;
  config["e8p_2bit_over_bound"] =
      bound > 0.0 ? det.adaptive.report.proxy_loss / bound : 0.0;
  config["threads"] = cfg.threads;
  return finish_report("error-bound-study", cfg.seed, cfg.timestamp,
                       std::move(config), rows, assertions);
}

}  // namespace latq
