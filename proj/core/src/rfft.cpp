#include "latq/rfft.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "latq/errors.hpp"

namespace latq {
namespace {

// One in-place plan per (length, direction).  Plan creation is not
// thread-safe in FFTW, so it is serialized; execution via the new-array
// interface is safe from concurrent threads.  FFTW_ESTIMATE keeps planning
// deterministic (no runtime measurement).
fftw_plan get_plan(std::size_t m, int direction) {
  static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
  static std::mutex mutex;
  std::scoped_lock lock(mutex);
  auto key = std::make_pair(m, direction);
  auto it = cache.find(key);
  if (it == cache.end()) {
    std::vector<std::complex<double>> buf(m);
    auto* ptr = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(m), ptr, ptr, direction,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw NumericalError("rfft: FFTW planning failed");
    it = cache.emplace(key, plan).first;
  }
  return it->second;
}

}  // namespace

void rfft_apply(const PhaseVector& phases, std::span<double> x,
                bool transpose) {
  const std::size_t n = phases.length;
  if (n % 2 != 0 || n == 0)
    throw SizeError("rfft_apply: length must be even and positive");
  if (x.size() != n) throw SizeError("rfft_apply: vector length mismatch");
  const std::size_t m = n / 2;
  if (phases.phases.size() != m)
    throw SizeError("rfft_apply: phase count mismatch");

  std::vector<std::complex<double>> buf(m);
  for (std::size_t k = 0; k < m; ++k)
    buf[k] = std::complex<double>(x[2 * k], x[2 * k + 1]);

  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  auto* ptr = reinterpret_cast<fftw_complex*>(buf.data());
  if (!transpose) {
    for (std::size_t k = 0; k < m; ++k)
      buf[k] *= std::polar(1.0, phases.phases[k]);
    fftw_execute_dft(get_plan(m, FFTW_FORWARD), ptr, ptr);
    for (std::size_t k = 0; k < m; ++k) buf[k] *= scale;
  } else {
    // Transpose of the real map = conjugate-transpose of the complex map:
    // unnormalized inverse DFT, then the conjugate phases.
    fftw_execute_dft(get_plan(m, FFTW_BACKWARD), ptr, ptr);
    for (std::size_t k = 0; k < m; ++k)
      buf[k] *= scale * std::polar(1.0, -phases.phases[k]);
  }
  for (std::size_t k = 0; k < m; ++k) {
    x[2 * k] = buf[k].real();
    x[2 * k + 1] = buf[k].imag();
  }
}

Eigen::MatrixXd dense_rfft(const PhaseVector& phases) {
  const std::size_t n = phases.length;
  Eigen::MatrixXd T(n, n);
  std::vector<double> e(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    rfft_apply(phases, e);
    for (std::size_t i = 0; i < n; ++i)
      T(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e[i];
  }
  return T;
}

}  // namespace latq
