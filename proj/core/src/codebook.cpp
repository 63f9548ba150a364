#include "latq/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "latq/errors.hpp"
#include "latq/parallel.hpp"
#include "latq/rng.hpp"

namespace latq {

Codebook::Codebook(std::string id, int dim, double bits, int code_bits,
                   std::size_t size)
    : id_(std::move(id)),
      dim_(dim),
      bits_(bits),
      code_bits_(code_bits),
      size_(size) {}

double Codebook::sq_error(std::span<const double> v) const {
  std::vector<double> out(static_cast<std::size_t>(dim_));
  decode(encode(v), out);
  double dist = 0.0;
  for (std::size_t c = 0; c < out.size(); ++c) {
    const double d = v[c] - out[c];
    dist += d * d;
  }
  return dist;
}

TableCodebook::TableCodebook(std::string id, int dim, double bits,
                             int code_bits, Eigen::MatrixXd entries)
    : Codebook(std::move(id), dim, bits, code_bits,
               static_cast<std::size_t>(entries.rows())),
      entries_(std::move(entries)) {
  if (entries_.cols() != dim)
    throw SizeError("TableCodebook: entry width != dim");
  element_rms_ = std::sqrt(entries_.squaredNorm() /
                           static_cast<double>(entries_.size()));
}

std::uint32_t TableCodebook::encode(std::span<const double> v) const {
  if (v.size() != static_cast<std::size_t>(dim_))
    throw SizeError("encode: input length != dim");
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_idx = 0;
  for (std::size_t i = 0; i < size_; ++i) {
    double dist = 0.0;
    for (int c = 0; c < dim_; ++c) {
      const double d = v[static_cast<std::size_t>(c)] -
                       entries_(static_cast<Eigen::Index>(i), c);
      dist += d * d;
    }
    if (dist < best) {  // strict: ties keep the smallest index
      best = dist;
      best_idx = static_cast<std::uint32_t>(i);
    }
  }
  return best_idx;
}

void TableCodebook::decode(std::uint32_t code, std::span<double> out) const {
  if (code >= size_) throw ValidationError("decode: codeword out of range");
  if (out.size() != static_cast<std::size_t>(dim_))
    throw SizeError("decode: output length != dim");
  for (int c = 0; c < dim_; ++c)
    out[static_cast<std::size_t>(c)] =
        entries_(static_cast<Eigen::Index>(code), c);
}

double TableCodebook::sq_error(std::span<const double> v) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size_; ++i) {
    double dist = 0.0;
    for (int c = 0; c < dim_; ++c) {
      const double d = v[static_cast<std::size_t>(c)] -
                       entries_(static_cast<Eigen::Index>(i), c);
      dist += d * d;
    }
    best = std::min(best, dist);
  }
  return best;
}

E8pCodebook::E8pCodebook()
    : Codebook("e8p-2bit", 8, 2.0, 16, 1u << 16), tables_(e8p_tables()) {
  // Element RMS over all 2^16 decoded points.
  double sum_sq = 0.0;
  double out[8];
  for (std::uint32_t w = 0; w < (1u << 16); ++w) {
    e8p_decode(tables_, static_cast<std::uint16_t>(w), out);
    for (double x : out) sum_sq += x * x;
  }
  element_rms_ = std::sqrt(sum_sq / (65536.0 * 8.0));
}

std::uint32_t E8pCodebook::encode(std::span<const double> v) const {
  return e8p_encode(tables_, v);
}

void E8pCodebook::decode(std::uint32_t code, std::span<double> out) const {
  if (code >= size_) throw ValidationError("decode: codeword out of range");
  e8p_decode(tables_, static_cast<std::uint16_t>(code), out);
}

double E8pCodebook::sq_error(std::span<const double> v) const {
  return e8p_sq_error(tables_, v);
}

namespace {

// Scalar half-integer grid with 2^k levels; closed-form encode.
class GridCodebook final : public TableCodebook {
 public:
  GridCodebook(std::string id, int bits, Eigen::MatrixXd entries)
      : TableCodebook(std::move(id), 1, bits, bits <= 8 ? 8 : 16,
                      std::move(entries)),
        cap_((static_cast<double>(size()) - 1.0) / 2.0) {}

  std::uint32_t encode(std::span<const double> v) const override {
    if (v.size() != 1) throw SizeError("encode: input length != dim");
    const double x = v[0];
    double h;
    if (x == std::floor(x) && x != 0.0) {
      // Exactly between two levels: the smaller index is the one nearer
      // zero (and negative at zero itself).
      h = x > 0.0 ? x - 0.5 : x + 0.5;
    } else if (x == 0.0) {
      h = -0.5;
    } else {
      h = std::floor(x) + 0.5;
    }
    h = std::clamp(h, -cap_, cap_);
    const auto j = static_cast<std::uint32_t>(std::fabs(h) - 0.5);
    return 2 * j + (h > 0.0 ? 1 : 0);
  }

  double sq_error(std::span<const double> v) const override {
    const double x = v[0];
    const double h = std::clamp(std::floor(x) + 0.5, -cap_, cap_);
    const double d = x - h;
    return d * d;
  }

 private:
  double cap_;  // largest representable half-integer
};

std::int64_t isqrt_floor(std::int64_t r) {
  if (r < 0) return -1;
  auto s = static_cast<std::int64_t>(std::sqrt(static_cast<double>(r)));
  while (s * s > r) --s;
  while ((s + 1) * (s + 1) <= r) ++s;
  return s;
}

// Enumerates doubled-coordinate vectors of one parity with squared norm
// <= r2 into `out`; `mod4` requires the coordinate sum = 0 (mod 4).
void enumerate_shell(int dim, bool odd, bool mod4, std::int64_t r2,
                     std::vector<std::vector<std::int64_t>>& out) {
  std::vector<std::int64_t> cur(static_cast<std::size_t>(dim));
  auto rec = [&](auto&& self, int pos, std::int64_t rem,
                 std::int64_t sum) -> void {
    if (pos == dim) {
      if (!mod4 || ((sum % 4) + 4) % 4 == 0)
        out.push_back(cur);
      return;
    }
    std::int64_t tmax = isqrt_floor(rem);
    if (odd) {
      if (tmax % 2 == 0) --tmax;
    } else {
      if (tmax % 2 != 0) --tmax;
    }
    for (std::int64_t t = -tmax; t <= tmax; t += 2) {
      cur[static_cast<std::size_t>(pos)] = t;
      self(self, pos + 1, rem - t * t, sum + t);
    }
  };
  rec(rec, 0, r2, 0);
}

}  // namespace

TableCodebook build_lattice_ball(LatticeFamily family, int dim, int bits) {
  if (dim <= 0 || dim > 8)
    throw SizeError("build_lattice_ball: dim must be in 1..8");
  if (bits <= 0 || bits > 16)
    throw ValidationError("build_lattice_ball: bits must be in 1..16");
  const double total_bits = static_cast<double>(bits) * dim;
  if (total_bits > 24)
    throw ValidationError("build_lattice_ball: table would be too large");
  const std::size_t target = std::size_t{1} << (bits * dim);

  std::vector<std::vector<std::int64_t>> pts;
  std::int64_t r2 = 4 * dim;
  for (;;) {
    pts.clear();
    switch (family) {
      case LatticeFamily::d4:
        enumerate_shell(dim, /*odd=*/false, /*mod4=*/true, r2, pts);
        break;
      case LatticeFamily::e8:
        enumerate_shell(dim, /*odd=*/false, /*mod4=*/true, r2, pts);
        enumerate_shell(dim, /*odd=*/true, /*mod4=*/true, r2, pts);
        break;
      case LatticeFamily::half_grid:
        enumerate_shell(dim, /*odd=*/true, /*mod4=*/false, r2, pts);
        break;
    }
    if (pts.size() >= target) break;
    r2 *= 2;
  }

  std::sort(pts.begin(), pts.end(),
            [](const std::vector<std::int64_t>& a,
               const std::vector<std::int64_t>& b) {
              std::int64_t na = 0, nb = 0;
              for (std::int64_t v : a) na += v * v;
              for (std::int64_t v : b) nb += v * v;
              if (na != nb) return na < nb;
              return a < b;
            });
  pts.resize(target);

  Eigen::MatrixXd entries(static_cast<Eigen::Index>(target), dim);
  for (std::size_t i = 0; i < target; ++i)
    for (int c = 0; c < dim; ++c)
      entries(static_cast<Eigen::Index>(i), c) =
          0.5 * static_cast<double>(pts[i][static_cast<std::size_t>(c)]);

  const char* name = family == LatticeFamily::d4
                         ? "d4"
                         : (family == LatticeFamily::e8 ? "e8" : "grid");
  const std::string id =
      std::string(name) + "-" + std::to_string(bits) + "bit";
  const int code_bits = target <= 256 ? 8 : 16;
  return TableCodebook(id, dim, static_cast<double>(bits), code_bits,
                       std::move(entries));
}

std::shared_ptr<const Codebook> make_codebook(std::string_view id) {
  static std::map<std::string, std::shared_ptr<const Codebook>, std::less<>>
      cache;
  static std::mutex mutex;
  std::scoped_lock lock(mutex);
  if (auto it = cache.find(id); it != cache.end()) return it->second;

  std::shared_ptr<const Codebook> cb;
  if (id == "e8p-2bit") {
    cb = std::make_shared<E8pCodebook>();
  } else if (id == "e8-1bit") {
    cb = std::make_shared<TableCodebook>(
        build_lattice_ball(LatticeFamily::e8, 8, 1));
  } else if (id == "d4-2bit") {
    cb = std::make_shared<TableCodebook>(
        build_lattice_ball(LatticeFamily::d4, 4, 2));
  } else if (id.starts_with("grid-") && id.ends_with("bit")) {
    const std::string k_str(id.substr(5, id.size() - 8));
    int k = 0;
    try {
      std::size_t used = 0;
      k = std::stoi(k_str, &used);
      if (used != k_str.size()) k = 0;
    } catch (const std::exception&) {
      k = 0;
    }
    if (k < 1 || k > 16)
      throw ValidationError("unknown codebook id '" + std::string(id) + "'");
    TableCodebook table = build_lattice_ball(LatticeFamily::half_grid, 1, k);
    cb = std::make_shared<GridCodebook>(table.id(), k, table.entries());
  } else {
    throw ValidationError("unknown codebook id '" + std::string(id) + "'");
  }
  cache.emplace(std::string(id), cb);
  return cb;
}

namespace {

double golden_min(double lo, double hi, double tol,
                  const std::function<double(double)>& f) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

MseResult codebook_mse(const Codebook& cb, std::size_t num_samples,
                       std::uint64_t seed, int threads) {
  if (num_samples == 0)
    throw ValidationError("codebook_mse: need at least one sample");
  const auto d = static_cast<std::size_t>(cb.dim());
  std::vector<double> samples(num_samples * d);
  Rng rng(seed);
  for (double& v : samples) v = rng.gaussian();

  // Sum of squared errors over samples [begin, end) at scale s, accumulated
  // over a fixed chunk grid so results are thread-count invariant.
  auto sq_sums = [&](double s, std::size_t count) {
    std::vector<double> sum(kReductionChunks, 0.0);
    std::vector<double> sum_sq(kReductionChunks, 0.0);
    const double inv_s = 1.0 / s;
    parallel_chunks(count, kReductionChunks, threads,
                    [&](std::size_t chunk, std::size_t begin,
                        std::size_t end) {
                      std::vector<double> scaled(d);
                      double acc = 0.0, acc2 = 0.0;
                      for (std::size_t i = begin; i < end; ++i) {
                        const double* v = samples.data() + i * d;
                        for (std::size_t c = 0; c < d; ++c)
                          scaled[c] = v[c] * inv_s;
                        const double err =
                            s * s * cb.sq_error(scaled) /
                            static_cast<double>(d);
                        acc += err;
                        acc2 += err * err;
                      }
                      sum[chunk] = acc;
                      sum_sq[chunk] = acc2;
                    });
    double total = 0.0, total_sq = 0.0;
    for (std::size_t c = 0; c < kReductionChunks; ++c) {
      total += sum[c];
      total_sq += sum_sq[c];
    }
    return std::make_pair(total, total_sq);
  };

  const double unit =
      cb.element_rms() > 0.0 ? 1.0 / cb.element_rms() : 1.0;
  const std::size_t search_n = std::min<std::size_t>(num_samples, 50'000);
  auto search_mse = [&](double s) {
    return sq_sums(s, search_n).first / static_cast<double>(search_n);
  };
  const double best_s =
      golden_min(0.1 * unit, 10.0 * unit, 1e-4 * unit, search_mse);

  auto [total, total_sq] = sq_sums(best_s, num_samples);
  const double n = static_cast<double>(num_samples);
  MseResult r;
  r.scale = best_s;
  r.mse = total / n;
  const double var = std::max(0.0, total_sq / n - r.mse * r.mse);
  r.se = std::sqrt(var / n);
  return r;
}

}  // namespace latq
