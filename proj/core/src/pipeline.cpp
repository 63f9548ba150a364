#include "latq/pipeline.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "latq/errors.hpp"

namespace latq {
namespace {

constexpr char kMagic[4] = {'Q', 'S', 'H', 'P'};

SideTransform side_from_artifact(const QuantizedLinear& a, bool left) {
  SideTransform side;
  side.kind = a.transform;
  side.n = left ? a.m : a.n;
  if (a.transform == TransformKind::rht) {
    side.spec = plan_hadamard(side.n);
    side.signs = left ? a.left_signs : a.right_signs;
  } else {
    side.phases = left ? a.left_phases : a.right_phases;
  }
  return side;
}

}  // namespace

RvqQuantizer artifact_quantizer(const QuantizedLinear& a) {
  RvqScheme scheme;
  std::vector<double> scales;
  for (const StageInfo& st : a.stages) {
    scheme.push_back({st.codebook, 1.0});
    scales.push_back(static_cast<double>(st.scale));
  }
  return RvqQuantizer(scheme, std::move(scales));
}

int artifact_block_dim(const QuantizedLinear& a) {
  if (a.stages.empty())
    throw ValidationError("artifact has no quantization stages");
  return make_codebook(a.stages.front().codebook)->dim();
}

QuantizeOutput quantize_layer(const Eigen::MatrixXd& w,
                              const Eigen::MatrixXd& h,
                              const QuantConfig& cfg) {
  const auto m = static_cast<std::size_t>(w.rows());
  const auto n = static_cast<std::size_t>(w.cols());
  if (m == 0 || n == 0) throw SizeError("quantize_layer: empty weight matrix");

  const RvqScheme scheme = default_scheme(cfg.bits);
  const int g = make_codebook(scheme.front().codebook)->dim();
  if (cfg.g != g)
    throw ValidationError(
        "quantize_layer: cfg.g must equal the scheme's codeword dimension (" +
        std::to_string(g) + ")");
  if (n % static_cast<std::size_t>(g) != 0)
    throw SizeError("quantize_layer: n must be a multiple of " +
                    std::to_string(g));

  IncoherentLayer layer = cfg.transform == TransformKind::rht
                              ? ip_rht(w, h, cfg.seed)
                              : ip_rfft(w, h, cfg.seed);
  if (cfg.hessian_eps > 0.0)
    layer.h_hat.diagonal().array() +=
        cfg.hessian_eps * layer.h_hat.diagonal().mean();

  const double r1 =
      layer.w_hat.norm() / std::sqrt(static_cast<double>(m) * n);

  // Freeze scales at single precision first so the quantizer sees exactly
  // what the artifact stores.
  std::vector<double> scales = stage_scales(scheme, r1);
  std::vector<StageInfo> stages;
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    const float s32 = static_cast<float>(scales[i]);
    stages.push_back({scheme[i].codebook, s32});
    scales[i] = static_cast<double>(s32);
  }
  RvqQuantizer q(scheme, scales);

  LdlqResult rounded =
      block_ldlq(layer.w_hat, layer.h_hat, q, g, cfg.threads);

  QuantizeOutput out;
  out.artifact.version = kFormatVersion;
  out.artifact.m = static_cast<std::uint32_t>(m);
  out.artifact.n = static_cast<std::uint32_t>(n);
  out.artifact.transform = cfg.transform;
  out.artifact.stages = std::move(stages);
  if (cfg.transform == TransformKind::rht) {
    out.artifact.left_signs = layer.left.signs;
    out.artifact.right_signs = layer.right.signs;
  } else {
    out.artifact.left_phases = layer.left.phases;
    out.artifact.right_phases = layer.right.phases;
  }
  out.artifact.codes = std::move(rounded.codes);
  out.report = std::move(rounded.report);
  out.incoherence_w = measure_incoherence_w(layer.w_hat);
  out.incoherence_h = measure_incoherence_h(layer.h_hat);
  out.r1 = r1;
  return out;
}

namespace {

// Accumulates all decoded stages into the m x n incoherent-domain matrix.
Eigen::MatrixXd decode_incoherent(const QuantizedLinear& a) {
  const int g = artifact_block_dim(a);
  if (a.n % static_cast<std::uint32_t>(g) != 0)
    throw FormatError("artifact: n not divisible by codeword dimension");
  const std::size_t nb = a.n / static_cast<std::uint32_t>(g);
  if (a.codes.size() != a.stages.size())
    throw FormatError("artifact: stage/code count mismatch");

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(a.m, a.n);
  std::vector<double> point(static_cast<std::size_t>(g));
  for (std::size_t s = 0; s < a.stages.size(); ++s) {
    const auto cb = make_codebook(a.stages[s].codebook);
    if (cb->dim() != g)
      throw ValidationError("artifact: stages disagree on dimension");
    const double scale = static_cast<double>(a.stages[s].scale);
    if (a.codes[s].size() != static_cast<std::size_t>(a.m) * nb)
      throw FormatError("artifact: codeword count mismatch");
    for (std::size_t r = 0; r < a.m; ++r)
      for (std::size_t k = 0; k < nb; ++k) {
        cb->decode(a.codes[s][r * nb + k], point);
        for (int c = 0; c < g; ++c)
          acc(static_cast<Eigen::Index>(r),
              static_cast<Eigen::Index>(k * g + c)) += scale * point[static_cast<std::size_t>(c)];
      }
  }
  return acc;
}

}  // namespace

Eigen::MatrixXd dequantize_layer(const QuantizedLinear& a) {
  Eigen::MatrixXd w = decode_incoherent(a);
  const SideTransform left = side_from_artifact(a, /*left=*/true);
  const SideTransform right = side_from_artifact(a, /*left=*/false);
  transform_cols(left, w, /*transpose=*/true);
  transform_rows(right, w, /*transpose=*/true);
  return w;
}

Eigen::VectorXd infer(const QuantizedLinear& a, const Eigen::VectorXd& x) {
  if (static_cast<std::uint32_t>(x.size()) != a.n)
    throw SizeError("infer: input length != n");
  const int g = artifact_block_dim(a);
  const std::size_t nb = a.n / static_cast<std::uint32_t>(g);
  const std::size_t n_stages = a.stages.size();

  std::vector<const Codebook*> books;
  std::vector<std::shared_ptr<const Codebook>> owners;
  std::vector<double> scales;
  for (const StageInfo& st : a.stages) {
    owners.push_back(make_codebook(st.codebook));
    books.push_back(owners.back().get());
    scales.push_back(static_cast<double>(st.scale));
  }

  // t = T_v x
  Eigen::VectorXd t = x;
  const SideTransform right = side_from_artifact(a, /*left=*/false);
  right.apply(std::span<double>(t.data(), t.size()));

  // z_r = <row r of the decoded incoherent matrix, t>, one block at a time.
  Eigen::VectorXd z(a.m);
  std::vector<double> point(static_cast<std::size_t>(g));
  std::vector<double> block(static_cast<std::size_t>(g));
  for (std::size_t r = 0; r < a.m; ++r) {
    double acc = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      std::fill(block.begin(), block.end(), 0.0);
      for (std::size_t s = 0; s < n_stages; ++s) {
        books[s]->decode(a.codes[s][r * nb + k], point);
        for (int c = 0; c < g; ++c)
          block[static_cast<std::size_t>(c)] +=
              scales[s] * point[static_cast<std::size_t>(c)];
      }
      const double* tv = t.data() + k * static_cast<std::size_t>(g);
      for (int c = 0; c < g; ++c)
        acc += block[static_cast<std::size_t>(c)] * tv[c];
    }
    z(static_cast<Eigen::Index>(r)) = acc;
  }

  // y = T_u^T z
  const SideTransform left = side_from_artifact(a, /*left=*/true);
  left.apply_transpose(std::span<double>(z.data(), z.size()));
  return z;
}

namespace {

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::span<const std::uint8_t> b) {
    out_.insert(out_.end(), b.begin(), b.end());
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    auto b = take(2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32() {
    auto b = take(4);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::span<const std::uint8_t> take(std::size_t count) {
    if (pos_ + count > in_.size())
      throw TruncatedArtifactError("artifact ends after " +
                                   std::to_string(in_.size()) + " bytes");
    auto out = in_.subspan(pos_, count);
    pos_ += count;
    return out;
  }
  bool exhausted() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_phases(ByteWriter& w, const PhaseVector& p) {
  for (double theta : p.phases) w.f32(static_cast<float>(theta));
}

PhaseVector read_phases(ByteReader& r, std::size_t length) {
  PhaseVector p;
  p.length = length;
  p.phases.resize(length / 2);
  for (double& theta : p.phases) theta = static_cast<double>(r.f32());
  return p;
}

}  // namespace

std::vector<std::uint8_t> serialize(const QuantizedLinear& a) {
  std::vector<std::uint8_t> out;
  out.reserve(serialized_size(a));
  ByteWriter w(out);
  w.bytes(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(kMagic), 4));
  w.u16(a.version);
  w.u32(a.m);
  w.u32(a.n);
  w.u8(static_cast<std::uint8_t>(a.transform));
  if (a.stages.size() > 255)
    throw ValidationError("serialize: too many stages");
  w.u8(static_cast<std::uint8_t>(a.stages.size()));
  for (const StageInfo& st : a.stages) {
    if (st.codebook.size() > 255)
      throw ValidationError("serialize: codebook id too long");
    w.u8(static_cast<std::uint8_t>(st.codebook.size()));
    w.bytes(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(st.codebook.data()),
        st.codebook.size()));
    w.f32(st.scale);
  }
  if (a.transform == TransformKind::rht) {
    if (a.left_signs.size() != a.m || a.right_signs.size() != a.n)
      throw SizeError("serialize: sign vector lengths disagree with m, n");
    w.bytes(a.left_signs.bytes());
    w.bytes(a.right_signs.bytes());
  } else {
    if (a.left_phases.length != a.m || a.right_phases.length != a.n)
      throw SizeError("serialize: phase lengths disagree with m, n");
    write_phases(w, a.left_phases);
    write_phases(w, a.right_phases);
  }
  const int g = artifact_block_dim(a);
  const std::size_t nb = a.n / static_cast<std::uint32_t>(g);
  const std::size_t words = static_cast<std::size_t>(a.m) * nb;
  for (std::size_t s = 0; s < a.stages.size(); ++s) {
    if (a.codes[s].size() != words)
      throw SizeError("serialize: codeword count mismatch");
    const int bytes = make_codebook(a.stages[s].codebook)->code_bits() / 8;
    for (std::uint16_t word : a.codes[s]) {
      w.u8(static_cast<std::uint8_t>(word));
      if (bytes == 2) w.u8(static_cast<std::uint8_t>(word >> 8));
    }
  }
  return out;
}

void serialize(const QuantizedLinear& a, std::ostream& os) {
  const std::vector<std::uint8_t> bytes = serialize(a);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
}

QuantizedLinear deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0)
    throw BadMagicError("artifact does not start with QSHP");
  QuantizedLinear a;
  a.version = r.u16();
  if (a.version != kFormatVersion)
    throw UnsupportedVersionError("artifact format version " +
                                  std::to_string(a.version) +
                                  " (supported: " +
                                  std::to_string(kFormatVersion) + ")");
  a.m = r.u32();
  a.n = r.u32();
  const std::uint8_t kind = r.u8();
  if (kind > 1) throw FormatError("artifact: unknown transform kind");
  a.transform = static_cast<TransformKind>(kind);
  const std::uint8_t n_stages = r.u8();
  if (n_stages == 0) throw FormatError("artifact: zero stages");
  for (std::size_t s = 0; s < n_stages; ++s) {
    StageInfo st;
    const std::uint8_t id_len = r.u8();
    const auto id = r.take(id_len);
    st.codebook.assign(reinterpret_cast<const char*>(id.data()), id.size());
    st.scale = r.f32();
    a.stages.push_back(std::move(st));
  }
  if (a.transform == TransformKind::rht) {
    a.left_signs = SignVector::from_bytes(a.m, r.take((a.m + 7) / 8));
    a.right_signs = SignVector::from_bytes(a.n, r.take((a.n + 7) / 8));
  } else {
    if (a.m % 2 != 0 || a.n % 2 != 0)
      throw FormatError("artifact: phase transform needs even m and n");
    a.left_phases = read_phases(r, a.m);
    a.right_phases = read_phases(r, a.n);
  }
  const int g = artifact_block_dim(a);  // validates the codebook ids
  if (g <= 0 || a.n % static_cast<std::uint32_t>(g) != 0)
    throw FormatError("artifact: n not divisible by codeword dimension");
  const std::size_t nb = a.n / static_cast<std::uint32_t>(g);
  const std::size_t words = static_cast<std::size_t>(a.m) * nb;
  for (std::size_t s = 0; s < n_stages; ++s) {
    const auto cb = make_codebook(a.stages[s].codebook);
    if (cb->dim() != g)
      throw FormatError("artifact: stages disagree on dimension");
    const int bytes = cb->code_bits() / 8;
    std::vector<std::uint16_t> stage_codes(words);
    const auto raw = r.take(words * static_cast<std::size_t>(bytes));
    for (std::size_t i = 0; i < words; ++i) {
      std::uint16_t word = raw[i * static_cast<std::size_t>(bytes)];
      if (bytes == 2)
        word = static_cast<std::uint16_t>(
            word | (raw[i * 2 + 1] << 8));
      stage_codes[i] = word;
    }
    a.codes.push_back(std::move(stage_codes));
  }
  if (!r.exhausted())
    throw FormatError("artifact: trailing bytes after payload");
  return a;
}

QuantizedLinear deserialize(std::istream& is) {
  std::vector<std::uint8_t> bytes(
      (std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

std::size_t serialized_size(const QuantizedLinear& a) {
  std::size_t total = 4 + 2 + 4 + 4 + 1 + 1;  // magic..stage count
  for (const StageInfo& st : a.stages) total += 1 + st.codebook.size() + 4;
  if (a.transform == TransformKind::rht)
    total += (a.m + 7) / 8 + (a.n + 7) / 8;
  else
    total += 4 * (static_cast<std::size_t>(a.m) / 2 +
                  static_cast<std::size_t>(a.n) / 2);
  const int g = artifact_block_dim(a);
  const std::size_t words =
      static_cast<std::size_t>(a.m) * (a.n / static_cast<std::uint32_t>(g));
  for (const StageInfo& st : a.stages)
    total += words *
             static_cast<std::size_t>(make_codebook(st.codebook)->code_bits() / 8);
  return total;
}

double bits_per_weight(const QuantizedLinear& a) {
  if (a.m == 0 || a.n == 0)
    throw SizeError("bits_per_weight: empty artifact");
  return 8.0 * static_cast<double>(serialized_size(a)) /
         (static_cast<double>(a.m) * static_cast<double>(a.n));
}

}  // namespace latq
