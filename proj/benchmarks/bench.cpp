#include <benchmark/benchmark.h>

#include <vector>

#include "latq/codebook.hpp"
#include "latq/e8p.hpp"
#include "latq/fwht.hpp"
#include "latq/hadamard.hpp"
#include "latq/harness.hpp"
#include "latq/ldlq.hpp"
#include "latq/pipeline.hpp"
#include "latq/rng.hpp"
#include "latq/rvq.hpp"

namespace {

std::vector<double> gaussian_vec(std::size_t n, std::uint64_t seed) {
  latq::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.gaussian();
  return v;
}

void bm_fwht(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> v = gaussian_vec(n, 1);
  for (auto _ : state) {
    latq::fwht(v);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(bm_fwht)->Arg(1024)->Arg(4096)->Arg(16384);

void bm_had_apply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const latq::HadamardSpec spec = latq::plan_hadamard(n);
  std::vector<double> v = gaussian_vec(n, 2);
  for (auto _ : state) {
    latq::had_apply(spec, v, false);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(bm_had_apply)->Arg(1024)->Arg(5120)->Arg(28672);

void bm_e8p_encode(benchmark::State& state) {
  const auto cb = latq::make_codebook("e8p-2bit");
  std::vector<double> v = gaussian_vec(8, 3);
  std::uint32_t code = 0;
  for (auto _ : state) {
    code = cb->encode(v);
    benchmark::DoNotOptimize(code);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(bm_e8p_encode);

void bm_e8p_sq_error(benchmark::State& state) {
  const auto cb = latq::make_codebook("e8p-2bit");
  std::vector<double> v = gaussian_vec(8, 4);
  for (auto _ : state) {
    double err = cb->sq_error(v);
    benchmark::DoNotOptimize(err);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(bm_e8p_sq_error);

void bm_e8p_decode(benchmark::State& state) {
  const auto cb = latq::make_codebook("e8p-2bit");
  std::vector<double> out(8);
  std::uint32_t code = 0;
  for (auto _ : state) {
    cb->decode(code, out);
    benchmark::DoNotOptimize(out.data());
    code = (code + 40503u) & 0xFFFFu;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(bm_e8p_decode);

void bm_block_ldlq(benchmark::State& state) {
  const std::size_t n = 256, m = 256;
  const Eigen::MatrixXd w = latq::gen_weights(m, n, "gaussian", 0.0, 5);
  const Eigen::MatrixXd h = latq::gen_hessian(n, "wishart", 0.0, 6);
  const latq::IncoherentLayer layer = latq::ip_rht(w, h, 7);
  const latq::RvqScheme scheme = latq::default_scheme(2);
  const double r1 = layer.w_hat.norm() / std::sqrt(double(m * n));
  latq::RvqQuantizer q(scheme, latq::stage_scales(scheme, r1));
  for (auto _ : state) {
    latq::LdlqResult res =
        latq::block_ldlq(layer.w_hat, layer.h_hat, q, 8, 1);
    benchmark::DoNotOptimize(res.report.proxy_loss);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(m * n));
}
BENCHMARK(bm_block_ldlq)->Unit(benchmark::kMillisecond);

void bm_infer(benchmark::State& state) {
  const std::size_t n = 1024, m = 1024;
  const Eigen::MatrixXd w = latq::gen_weights(m, n, "gaussian", 0.0, 8);
  const Eigen::MatrixXd h = latq::gen_hessian(n, "identity", 0.0, 9);
  latq::QuantConfig cfg;
  cfg.threads = 4;
  const latq::QuantizedLinear artifact =
      latq::quantize_layer(w, h, cfg).artifact;
  const Eigen::VectorXd x =
      latq::gen_weights(n, 1, "gaussian", 0.0, 10).col(0);
  for (auto _ : state) {
    Eigen::VectorXd y = latq::infer(artifact, x);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(m * n));
}
BENCHMARK(bm_infer)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
