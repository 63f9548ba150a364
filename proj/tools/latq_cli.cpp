// latq: quantize/reconstruct synthetic linear layers and run the library's
// experiment suite from the command line.  Every run that carries
// assertions exits 0 only if all of them pass.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "latq/codebook.hpp"
#include "latq/errors.hpp"
#include "latq/hadamard.hpp"
#include "latq/harness.hpp"
#include "latq/pipeline.hpp"
#include "latq/rng.hpp"

namespace {

using latq::Error;
using latq::ValidationError;
using ojson = nlohmann::ordered_json;

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string out;            // empty or "-": stdout
  std::string format = "json";
  int threads = 0;            // 0: hardware, capped at 8
  std::string timestamp;      // empty: current UTC time
};

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 1u : hw, 8u));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open output file: " + path);
  f << text;
  if (!f) throw Error("short write to " + path);
}

void write_bytes(const std::string& path,
                 const std::vector<std::uint8_t>& bytes) {
  if (path.empty() || path == "-") {
    std::cout.write(reinterpret_cast<const char*>(bytes.data()),
                    static_cast<std::streamsize>(bytes.size()));
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open output file: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("short write to " + path);
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open input file: " + path);
  std::vector<std::uint8_t> bytes(
      (std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return bytes;
}

// Raw little-endian f64, row-major.
Eigen::MatrixXd read_matrix_bin(const std::string& path, std::size_t rows,
                                std::size_t cols) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  if (bytes.size() != rows * cols * sizeof(double))
    throw ValidationError(path + ": expected " +
                          std::to_string(rows * cols * sizeof(double)) +
                          " bytes for a " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " f64 matrix, got " +
                          std::to_string(bytes.size()));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  const double* src = reinterpret_cast<const double*>(bytes.data());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = *src++;
  return m;
}

std::vector<std::uint8_t> matrix_to_bytes(const Eigen::MatrixXd& m) {
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(m.size()) *
                                  sizeof(double));
  double* dst = reinterpret_cast<double*>(bytes.data());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) *dst++ = m(i, j);
  return bytes;
}

// Renders a single-record report in the requested format.
std::string render_record(const ojson& doc, const std::string& format) {
  if (format == "json") return doc.dump(2) + "\n";
  std::ostringstream header, row;
  bool first = true;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it->is_structured()) continue;  // flat fields only in CSV
    header << (first ? "" : ",") << it.key();
    row << (first ? "" : ",")
        << (it->is_string() ? it->get<std::string>() : it->dump());
    first = false;
  }
  return header.str() + "\n" + row.str() + "\n";
}

void emit_report(const latq::ExperimentReport& rep, const GlobalOpts& g) {
  write_text(g.out, g.format == "csv" ? rep.csv : rep.json);
}

Eigen::MatrixXd load_weights(const std::string& bin, const std::string& family,
                             std::size_t m, std::size_t n,
                             std::uint64_t seed) {
  if (!bin.empty()) return read_matrix_bin(bin, m, n);
  std::string kind;
  double param = 0.0;
  latq::parse_family(family, kind, param);
  return latq::gen_weights(m, n, kind, param, seed);
}

Eigen::MatrixXd load_hessian(const std::string& bin, const std::string& family,
                             std::size_t n, std::uint64_t seed) {
  if (!bin.empty()) return read_matrix_bin(bin, n, n);
  std::string kind;
  double param = 0.0;
  latq::parse_family(family, kind, param);
  return latq::gen_hessian(n, kind, param, seed);
}

int cmd_quantize(const GlobalOpts& g, std::size_t m, std::size_t n, int bits,
                 int block, const std::string& transform,
                 const std::string& weights, const std::string& weights_bin,
                 const std::string& hessian, const std::string& hessian_bin,
                 double hessian_eps, const std::string& artifact_path) {
  latq::Rng root(g.seed);
  const Eigen::MatrixXd w =
      load_weights(weights_bin, weights, m, n, root.substream(10).seed());
  const Eigen::MatrixXd h =
      load_hessian(hessian_bin, hessian, n, root.substream(11).seed());

  latq::QuantConfig cfg;
  cfg.bits = bits;
  cfg.g = block;
  cfg.transform = latq::parse_transform(transform);
  cfg.seed = g.seed;
  cfg.hessian_eps = hessian_eps;
  cfg.threads = resolve_threads(g.threads);
  const latq::QuantizeOutput out = latq::quantize_layer(w, h, cfg);

  const std::vector<std::uint8_t> bytes = latq::serialize(out.artifact);
  write_bytes(artifact_path, bytes);

  ojson doc;
  doc["command"] = "quantize";
  doc["m"] = m;
  doc["n"] = n;
  doc["bits"] = bits;
  doc["g"] = block;
  doc["transform"] = transform;
  doc["seed"] = g.seed;
  doc["proxy_loss"] = out.report.proxy_loss;
  doc["quantizer_calls"] = out.report.quantizer_calls;
  doc["incoherence_w"] = out.incoherence_w;
  doc["incoherence_h"] = out.incoherence_h;
  doc["rotated_rms"] = out.r1;
  doc["artifact"] = artifact_path;
  doc["artifact_bytes"] = bytes.size();
  doc["bits_per_weight"] = latq::bits_per_weight(out.artifact);
  write_text(g.out, render_record(doc, g.format));
  return 0;
}

int cmd_dequantize(const GlobalOpts& g, const std::string& artifact_path) {
  const std::vector<std::uint8_t> bytes = read_bytes(artifact_path);
  const latq::QuantizedLinear artifact =
      latq::deserialize(std::span<const std::uint8_t>(bytes));
  write_bytes(g.out, matrix_to_bytes(latq::dequantize_layer(artifact)));
  return 0;
}

int cmd_infer(const GlobalOpts& g, const std::string& artifact_path,
              const std::string& input_bin, std::size_t count) {
  const std::vector<std::uint8_t> bytes = read_bytes(artifact_path);
  const latq::QuantizedLinear artifact =
      latq::deserialize(std::span<const std::uint8_t>(bytes));
  Eigen::MatrixXd inputs;  // one vector per row
  if (!input_bin.empty()) {
    const std::vector<std::uint8_t> raw = read_bytes(input_bin);
    if (raw.empty() || raw.size() % (artifact.n * sizeof(double)) != 0)
      throw ValidationError(input_bin + ": size must be a multiple of n=" +
                            std::to_string(artifact.n) + " f64 values");
    inputs = read_matrix_bin(input_bin, raw.size() / (artifact.n * 8),
                             artifact.n);
  } else {
    inputs = latq::gen_weights(count, artifact.n, "gaussian", 0.0,
                               latq::Rng(g.seed).substream(12).seed());
  }
  Eigen::MatrixXd outputs(inputs.rows(),
                          static_cast<Eigen::Index>(artifact.m));
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    outputs.row(i) = latq::infer(artifact, inputs.row(i).transpose());
  write_bytes(g.out, matrix_to_bytes(outputs));
  return 0;
}

int cmd_dump_codebook(const GlobalOpts& g, const std::string& id,
                      std::size_t limit) {
  const auto cb = latq::make_codebook(id);
  const std::size_t count =
      limit == 0 ? cb->size() : std::min(limit, cb->size());
  std::ostringstream csv;
  csv << "code";
  for (int c = 0; c < cb->dim(); ++c) csv << ",c" << c;
  csv << "\n";
  std::vector<double> v(static_cast<std::size_t>(cb->dim()));
  char buf[32];
  for (std::size_t code = 0; code < count; ++code) {
    cb->decode(static_cast<std::uint32_t>(code), v);
    csv << code;
    for (double x : v) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      csv << "," << buf;
    }
    csv << "\n";
  }
  write_text(g.out, csv.str());
  return 0;
}

int cmd_roundtrip_check(const GlobalOpts& g, const std::string& artifact_path,
                        std::size_t m, std::size_t n, int bits,
                        const std::string& transform) {
  latq::QuantizedLinear artifact;
  std::vector<std::uint8_t> bytes1;
  if (!artifact_path.empty()) {
    bytes1 = read_bytes(artifact_path);
    artifact = latq::deserialize(std::span<const std::uint8_t>(bytes1));
  } else {
    latq::Rng root(g.seed);
    const Eigen::MatrixXd w =
        latq::gen_weights(m, n, "gaussian", 0.0, root.substream(10).seed());
    const Eigen::MatrixXd h =
        latq::gen_hessian(n, "wishart", 0.0, root.substream(11).seed());
    latq::QuantConfig cfg;
    cfg.bits = bits;
    cfg.transform = latq::parse_transform(transform);
    cfg.seed = g.seed;
    cfg.threads = resolve_threads(g.threads);
    artifact = latq::quantize_layer(w, h, cfg).artifact;
    bytes1 = latq::serialize(artifact);
  }

  const latq::QuantizedLinear again =
      latq::deserialize(std::span<const std::uint8_t>(bytes1));
  const std::vector<std::uint8_t> bytes2 = latq::serialize(again);

  const Eigen::VectorXd x = latq::gen_weights(
      artifact.n, 1, "gaussian", 0.0, latq::Rng(g.seed).substream(12).seed());
  const Eigen::VectorXd y_stream = latq::infer(again, x);
  const Eigen::VectorXd y_dense = latq::dequantize_layer(again) * x;
  const double rel_err =
      (y_stream - y_dense).norm() / std::max(y_dense.norm(), 1e-30);

  ojson assertions = ojson::array();
  auto push = [&](const std::string& name, bool passed, double observed,
                  double threshold) {
    ojson a;
    a["name"] = name;
    a["passed"] = passed;
    a["observed"] = observed;
    a["threshold"] = threshold;
    assertions.push_back(std::move(a));
  };
  push("serialize(deserialize(bytes)) is byte-identical", bytes1 == bytes2,
       bytes1 == bytes2 ? 1.0 : 0.0, 1.0);
  push("deserialized artifact equals original", again == artifact,
       again == artifact ? 1.0 : 0.0, 1.0);
  push("streamed infer matches dense reconstruction", rel_err < 1e-8,
       rel_err, 1e-8);

  bool ok = true;
  for (const auto& a : assertions)
    if (!a.at("passed").get<bool>()) ok = false;

  ojson doc;
  doc["command"] = "roundtrip-check";
  doc["m"] = artifact.m;
  doc["n"] = artifact.n;
  doc["transform"] = latq::transform_name(artifact.transform);
  doc["bytes"] = bytes1.size();
  doc["bits_per_weight"] = latq::bits_per_weight(artifact);
  doc["infer_rel_err"] = rel_err;
  doc["assertions"] = assertions;
  doc["passed"] = ok;
  write_text(g.out, render_record(doc, g.format));
  return ok ? 0 : 1;
}

int cmd_dump_hadamard(const GlobalOpts& g, std::size_t n) {
  const latq::HadamardSpec spec = latq::plan_hadamard(n);
  const Eigen::MatrixXd h = latq::dense_hadamard(spec);
  std::ostringstream csv;
  char buf[32];
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", h(i, j));
      csv << (j ? "," : "") << buf;
    }
    csv << "\n";
  }
  write_text(g.out, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "latq: incoherence-processed lattice quantization of linear layers"};
  app.require_subcommand(0, 1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "Root RNG seed")->capture_default_str();
  app.add_option("--out", g.out, "Output path (default: stdout)");
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--threads", g.threads,
                 "Worker threads (0 = hardware, capped at 8)")
      ->capture_default_str();
  app.add_option("--timestamp", g.timestamp,
                 "Override report timestamp (for reproducible output)");
  std::size_t dump_hadamard_n = 0;
  app.add_option("--dump-hadamard", dump_hadamard_n,
                 "Dump the planned n x n orthonormal Hadamard as CSV and exit");

  // quantize
  std::size_t q_m = 64, q_n = 64;
  int q_bits = 2, q_g = 8;
  std::string q_transform = "rht", q_weights = "gaussian",
              q_hessian = "wishart", q_weights_bin, q_hessian_bin,
              q_artifact;
  double q_eps = 0.0;
  CLI::App* quantize =
      app.add_subcommand("quantize", "Quantize a (W, H) pair to an artifact");
  quantize->add_option("--m", q_m, "Output rows")->capture_default_str();
  quantize->add_option("--n", q_n, "Input columns")->capture_default_str();
  quantize->add_option("--bits", q_bits, "Bit rate preset (2, 3, 4)")
      ->check(CLI::IsMember({2, 3, 4}))
      ->capture_default_str();
  quantize->add_option("--g", q_g, "Rounding block size")
      ->capture_default_str();
  quantize->add_option("--transform", q_transform, "rht or rfft")
      ->check(CLI::IsMember({"rht", "rfft"}))
      ->capture_default_str();
  quantize
      ->add_option("--weights", q_weights,
                   "Synthetic weight family (gaussian, student[:dof])")
      ->capture_default_str();
  quantize->add_option("--weights-bin", q_weights_bin,
                       "Raw f64 row-major m x n weight file");
  quantize
      ->add_option("--hessian", q_hessian,
                   "Synthetic Hessian family (identity, ar1[:tau], "
                   "wishart[:samples])")
      ->capture_default_str();
  quantize->add_option("--hessian-bin", q_hessian_bin,
                       "Raw f64 row-major n x n Hessian file");
  quantize->add_option("--hessian-eps", q_eps,
                       "Ridge added to the rotated Hessian, relative to "
                       "mean(diag)")
      ->capture_default_str();
  quantize->add_option("--artifact", q_artifact, "Artifact output path")
      ->required();

  // dequantize
  std::string d_artifact;
  CLI::App* dequantize = app.add_subcommand(
      "dequantize", "Reconstruct effective weights as raw f64 (row-major)");
  dequantize->add_option("--artifact", d_artifact, "Artifact path")
      ->required();

  // infer
  std::string i_artifact, i_input;
  std::size_t i_count = 1;
  CLI::App* infer = app.add_subcommand(
      "infer", "Apply the quantized layer to activation vectors");
  infer->add_option("--artifact", i_artifact, "Artifact path")->required();
  infer->add_option("--input", i_input,
                    "Raw f64 file of k x n row-major inputs "
                    "(default: seeded Gaussians)");
  infer->add_option("--count", i_count,
                    "Number of synthetic input vectors when --input is absent")
      ->capture_default_str();

  // mse-sweep
  latq::MseSweepConfig mse_cfg;
  CLI::App* mse = app.add_subcommand(
      "mse-sweep", "Optimal-scale codebook MSE on Gaussian samples");
  mse->add_option("--codebooks", mse_cfg.codebooks, "Codebook ids")
      ->capture_default_str();
  mse->add_option("--samples", mse_cfg.samples, "Monte Carlo samples")
      ->capture_default_str();

  // concentration
  latq::ConcentrationConfig conc_cfg;
  std::vector<std::string> conc_transforms = {"rht", "rfft"};
  CLI::App* conc = app.add_subcommand(
      "concentration", "Randomized-transform incoherence tail study");
  conc->add_option("--sizes", conc_cfg.sizes, "Matrix sizes")
      ->capture_default_str();
  conc->add_option("--trials", conc_cfg.trials, "Trials per cell")
      ->capture_default_str();
  conc->add_option("--delta", conc_cfg.delta, "Target tail probability")
      ->capture_default_str();
  conc->add_option("--hessians", conc_cfg.hessians, "Hessian families")
      ->capture_default_str();
  conc->add_option("--transforms", conc_transforms, "rht and/or rfft")
      ->capture_default_str();

  // rounding-table
  latq::RoundingTableConfig round_cfg;
  CLI::App* round = app.add_subcommand(
      "rounding-table", "Adaptive vs nearest rounding across bit rates");
  round->add_option("--m", round_cfg.m, "Rows")->capture_default_str();
  round->add_option("--n", round_cfg.n, "Columns")->capture_default_str();
  round->add_option("--seeds", round_cfg.seeds, "Instances")
      ->capture_default_str();
  round->add_option("--hessian", round_cfg.hessian, "Hessian family")
      ->capture_default_str();

  // theorem41
  latq::BoundStudyConfig bound_cfg;
  CLI::App* bound = app.add_subcommand(
      "theorem41", "Stochastic rounding proxy loss vs the analytic bound");
  bound->add_option("--n", bound_cfg.n, "Columns")->capture_default_str();
  bound->add_option("--m", bound_cfg.m, "Rows")->capture_default_str();
  bound->add_option("--g", bound_cfg.g, "Block size")->capture_default_str();
  bound->add_option("--runs", bound_cfg.runs, "Stochastic repetitions")
      ->capture_default_str();
  bound->add_option("--hessian", bound_cfg.hessian, "Hessian family")
      ->capture_default_str();

  // dump-codebook
  std::string dump_id;
  std::size_t dump_limit = 0;
  CLI::App* dump = app.add_subcommand(
      "dump-codebook", "Write a codebook as CSV, one decoded vector per row");
  dump->add_option("--id", dump_id, "Codebook id")->required();
  dump->add_option("--limit", dump_limit, "Rows to write (0 = all)")
      ->capture_default_str();

  // roundtrip-check
  std::string rt_artifact, rt_transform = "rht";
  std::size_t rt_m = 128, rt_n = 128;
  int rt_bits = 2;
  CLI::App* rt = app.add_subcommand(
      "roundtrip-check",
      "Serialize/deserialize idempotence and infer consistency");
  rt->add_option("--artifact", rt_artifact,
                 "Check an existing artifact instead of a synthetic one");
  rt->add_option("--m", rt_m, "Synthetic rows")->capture_default_str();
  rt->add_option("--n", rt_n, "Synthetic columns")->capture_default_str();
  rt->add_option("--bits", rt_bits, "Synthetic bit rate")
      ->check(CLI::IsMember({2, 3, 4}))
      ->capture_default_str();
  rt->add_option("--transform", rt_transform, "rht or rfft")
      ->check(CLI::IsMember({"rht", "rfft"}))
      ->capture_default_str();

  for (CLI::App* sub :
       {quantize, dequantize, infer, mse, conc, round, bound, dump, rt})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (dump_hadamard_n > 0) return cmd_dump_hadamard(g, dump_hadamard_n);
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 1;
    }
    const int threads = resolve_threads(g.threads);
    if (quantize->parsed())
      return cmd_quantize(g, q_m, q_n, q_bits, q_g, q_transform, q_weights,
                          q_weights_bin, q_hessian, q_hessian_bin, q_eps,
                          q_artifact);
    if (dequantize->parsed()) return cmd_dequantize(g, d_artifact);
    if (infer->parsed()) return cmd_infer(g, i_artifact, i_input, i_count);
    if (mse->parsed()) {
      mse_cfg.seed = g.seed;
      mse_cfg.threads = threads;
      mse_cfg.timestamp = g.timestamp;
      const latq::ExperimentReport rep = latq::run_mse_sweep(mse_cfg);
      emit_report(rep, g);
      return rep.passed ? 0 : 1;
    }
    if (conc->parsed()) {
      conc_cfg.transforms.clear();
      for (const std::string& t : conc_transforms)
        conc_cfg.transforms.push_back(latq::parse_transform(t));
      conc_cfg.seed = g.seed;
      conc_cfg.threads = threads;
      conc_cfg.timestamp = g.timestamp;
      const latq::ExperimentReport rep = latq::run_concentration(conc_cfg);
      emit_report(rep, g);
      return rep.passed ? 0 : 1;
    }
    if (round->parsed()) {
      round_cfg.seed = g.seed;
      round_cfg.threads = threads;
      round_cfg.timestamp = g.timestamp;
      const latq::ExperimentReport rep = latq::run_rounding_table(round_cfg);
      emit_report(rep, g);
      return rep.passed ? 0 : 1;
    }
    if (bound->parsed()) {
      bound_cfg.seed = g.seed;
      bound_cfg.threads = threads;
      bound_cfg.timestamp = g.timestamp;
      const latq::ExperimentReport rep =
          latq::run_error_bound_study(bound_cfg);
      emit_report(rep, g);
      return rep.passed ? 0 : 1;
    }
    if (dump->parsed()) return cmd_dump_codebook(g, dump_id, dump_limit);
    if (rt->parsed())
      return cmd_roundtrip_check(g, rt_artifact, rt_m, rt_n, rt_bits,
                                 rt_transform);
    std::cerr << app.help();
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
