#include "latq/transforms.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "latq/errors.hpp"

namespace latq {

const char* transform_name(TransformKind kind) {
  switch (kind) {
    case TransformKind::rht:
      return "rht";
    case TransformKind::rfft:
      return "rfft";
  }
  throw ValidationError("transform_name: unknown kind");
}

TransformKind parse_transform(std::string_view name) {
  if (name == "rht") return TransformKind::rht;
  if (name == "rfft") return TransformKind::rfft;
  throw ValidationError("unknown transform '" + std::string(name) +
                        "' (expected rht or rfft)");
}

void SideTransform::apply(std::span<double> x) const {
  if (x.size() != n) throw SizeError("SideTransform::apply: length mismatch");
  if (kind == TransformKind::rht) {
    signs.apply(x);
    had_apply(spec, x, /*transpose=*/false);
  } else {
    rfft_apply(phases, x, /*transpose=*/false);
  }
}

void SideTransform::apply_transpose(std::span<double> x) const {
  if (x.size() != n)
    throw SizeError("SideTransform::apply_transpose: length mismatch");
  if (kind == TransformKind::rht) {
    had_apply(spec, x, /*transpose=*/true);
    signs.apply(x);
  } else {
    rfft_apply(phases, x, /*transpose=*/true);
  }
}

SideTransform make_rht_side(std::size_t n, Rng rng) {
  SideTransform side;
  side.kind = TransformKind::rht;
  side.n = n;
  side.spec = plan_hadamard(n);
  side.signs = SignVector::random(n, rng);
  return side;
}

SideTransform make_rfft_side(std::size_t n, Rng rng) {
  SideTransform side;
  side.kind = TransformKind::rfft;
  side.n = n;
  side.phases = PhaseVector::random(n, rng);
  return side;
}

void transform_cols(const SideTransform& side, Eigen::MatrixXd& a,
                    bool transpose) {
  if (static_cast<std::size_t>(a.rows()) != side.n)
    throw SizeError("transform_cols: row count mismatch");
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    std::span<double> col(a.col(j).data(), side.n);
    if (transpose)
      side.apply_transpose(col);
    else
      side.apply(col);
  }
}

void transform_rows(const SideTransform& side, Eigen::MatrixXd& a,
                    bool transpose) {
  if (static_cast<std::size_t>(a.cols()) != side.n)
    throw SizeError("transform_rows: column count mismatch");
  std::vector<double> row(side.n);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < side.n; ++j)
      row[j] = a(i, static_cast<Eigen::Index>(j));
    if (transpose)
      side.apply_transpose(row);
    else
      side.apply(row);
    for (std::size_t j = 0; j < side.n; ++j)
      a(i, static_cast<Eigen::Index>(j)) = row[j];
  }
}

Eigen::MatrixXd dense_transform(const SideTransform& side) {
  const std::size_t n = side.n;
  Eigen::MatrixXd t(n, n);
  std::vector<double> e(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    side.apply(e);
    for (std::size_t i = 0; i < n; ++i)
      t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e[i];
  }
  return t;
}

Eigen::MatrixXd validate_psd(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols())
    throw SizeError("validate_psd: Hessian must be square");
  Eigen::MatrixXd sym = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("validate_psd: eigenvalue computation failed");
  const double min_eig = es.eigenvalues().minCoeff();
  const double max_eig = es.eigenvalues().maxCoeff();
  if (min_eig < -1e-8 * std::max(max_eig, 0.0))
    throw ValidationError("validate_psd: Hessian is not PSD (min eig " +
                          std::to_string(min_eig) + ")");
  return sym;
}

namespace {

IncoherentLayer conjugate_layer(const Eigen::MatrixXd& w,
                                const Eigen::MatrixXd& h, std::uint64_t seed,
                                TransformKind kind) {
  const std::size_t m = static_cast<std::size_t>(w.rows());
  const std::size_t n = static_cast<std::size_t>(w.cols());
  if (static_cast<std::size_t>(h.rows()) != n)
    throw SizeError("incoherence processing: H must be n x n with n = cols(W)");
  Eigen::MatrixXd sym = validate_psd(h);

  Rng root(seed);
  auto make_side = [&](std::size_t dim, std::uint64_t stream) {
    return kind == TransformKind::rht ? make_rht_side(dim, root.substream(stream))
                                      : make_rfft_side(dim, root.substream(stream));
  };
  IncoherentLayer layer;
  layer.left = make_side(m, 0);
  layer.right = make_side(n, 1);

  layer.w_hat = w;
  transform_cols(layer.left, layer.w_hat);
  transform_rows(layer.right, layer.w_hat);

  layer.h_hat = std::move(sym);
  transform_cols(layer.right, layer.h_hat);
  transform_rows(layer.right, layer.h_hat);
  return layer;
}

}  // namespace

IncoherentLayer ip_rht(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                       std::uint64_t seed) {
  return conjugate_layer(w, h, seed, TransformKind::rht);
}

IncoherentLayer ip_rfft(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                        std::uint64_t seed) {
  return conjugate_layer(w, h, seed, TransformKind::rfft);
}

double measure_incoherence_w(const Eigen::MatrixXd& w) {
  const double fro = w.norm();
  if (fro == 0.0) return 0.0;
  const double dim = std::sqrt(static_cast<double>(w.rows()) *
                               static_cast<double>(w.cols()));
  return w.cwiseAbs().maxCoeff() * dim / fro;
}

double measure_incoherence_h(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols())
    throw SizeError("measure_incoherence_h: matrix must be square");
  Eigen::MatrixXd sym = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success)
    throw NumericalError("measure_incoherence_h: eigendecomposition failed");
  return std::sqrt(static_cast<double>(h.rows())) *
         es.eigenvectors().cwiseAbs().maxCoeff();
}

MuBounds mu_bounds(std::size_t n, std::size_t m, double delta) {
  if (delta <= 0.0 || delta >= 1.0)
    throw ValidationError("mu_bounds: delta must be in (0, 1)");
  MuBounds b;
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  b.mu_h = std::sqrt(2.0 * std::log(2.0 * dn * dn / delta));
  b.mu_w = 2.0 * std::log(4.0 * dm * dn / delta);
  return b;
}

}  // namespace latq
