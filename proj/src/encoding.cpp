#include "mmhdc/encoding.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "binary_io.hpp"

namespace mmhdc {

namespace {

std::size_t projection_width(EncoderKind kind, std::size_t output_dim) {
  return kind == EncoderKind::rff ? output_dim / 2 : output_dim;
}

void validate(EncoderKind kind, std::size_t input_dim, std::size_t output_dim, double sigma) {
  if (input_dim == 0) throw std::invalid_argument("encoder input dimension must be positive");
  if (output_dim == 0) throw std::invalid_argument("encoder output dimension must be positive");
  if (kind == EncoderKind::rff) {
    if (output_dim % 2 != 0) throw std::invalid_argument("rff encoder needs an even output dimension");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("rff sigma must be positive");
  } else if (kind != EncoderKind::onlinehd) {
    throw std::invalid_argument("unknown encoder kind");
  }
}

}  // namespace

Encoder Encoder::sample(EncoderKind kind, std::size_t input_dim, std::size_t output_dim,
                        double sigma, std::uint64_t seed) {
  validate(kind, input_dim, output_dim, sigma);
  Encoder enc;
  enc.kind_ = kind;
  enc.input_dim_ = input_dim;
  enc.output_dim_ = output_dim;
  enc.sigma_ = sigma;
  enc.seed_ = seed;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = kind == EncoderKind::rff ? 1.0 / sigma : 1.0;
  enc.projection_ = Matrix(input_dim, projection_width(kind, output_dim));
  for (double& w : enc.projection_.data()) w = normal(rng) * scale;

  if (kind == EncoderKind::onlinehd) {
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
    enc.phase_.resize(output_dim);
    for (double& p : enc.phase_) p = uniform(rng);
  }
  return enc;
}

Encoder Encoder::from_parts(EncoderKind kind, std::size_t input_dim, std::size_t output_dim,
                            double sigma, std::uint64_t seed, Matrix projection, Vector phase) {
  validate(kind, input_dim, output_dim, sigma);
  if (projection.rows() != input_dim || projection.cols() != projection_width(kind, output_dim)) {
    throw DimensionError("projection matrix shape does not match encoder dimensions");
  }
  const std::size_t phase_len = kind == EncoderKind::onlinehd ? output_dim : 0;
  require_same_length(phase.size(), phase_len, "encoder phase");
  Encoder enc;
  enc.kind_ = kind;
  enc.input_dim_ = input_dim;
  enc.output_dim_ = output_dim;
  enc.sigma_ = sigma;
  enc.seed_ = seed;
  enc.projection_ = std::move(projection);
  enc.phase_ = std::move(phase);
  return enc;
}

HyperVector Encoder::encode(std::span<const double> x) const {
  HyperVector out(output_dim_);
  encode_into(x, out);
  return out;
}

void Encoder::encode_into(std::span<const double> x, std::span<double> out) const {
  require_same_length(x.size(), input_dim_, "encode input");
  require_same_length(out.size(), output_dim_, "encode output");
  const std::size_t width = projection_.cols();
  Vector z(width, 0.0);
  for (std::size_t j = 0; j < input_dim_; ++j) {
    if (x[j] != 0.0) axpy(x[j], projection_.row(j), z);
  }
  if (kind_ == EncoderKind::onlinehd) {
    for (std::size_t k = 0; k < width; ++k) out[k] = std::cos(z[k] + phase_[k]) * std::sin(z[k]);
  } else {
    const double s = std::sqrt(2.0 / static_cast<double>(output_dim_));
    for (std::size_t k = 0; k < width; ++k) {
      out[k] = s * std::cos(z[k]);
      out[k + width] = s * std::sin(z[k]);
    }
  }
}

Matrix Encoder::encode_batch(const Matrix& points, unsigned threads) const {
  if (points.cols() != input_dim_ && !points.empty()) {
    throw DimensionError("encode_batch: point length " + std::to_string(points.cols()) +
                         " does not match encoder input " + std::to_string(input_dim_));
  }
  Matrix out(points.rows(), output_dim_);
  parallel_for(points.rows(), [&](std::size_t i) { encode_into(points.row(i), out.row(i)); }, threads);
  return out;
}

void Encoder::save(std::ostream& out) const {
  detail::write_u64(out, static_cast<std::uint64_t>(kind_));
  detail::write_u64(out, input_dim_);
  detail::write_u64(out, output_dim_);
  detail::write_f64(out, sigma_);
  detail::write_u64(out, seed_);
  detail::write_f64s(out, projection_.data());
  detail::write_f64s(out, phase_);
}

Encoder Encoder::load(std::istream& in) {
  const auto tag = detail::read_u64(in);
  if (tag > 1) throw detail::FormatError("unknown encoder kind tag " + std::to_string(tag));
  const auto kind = static_cast<EncoderKind>(tag);
  const auto d = detail::read_u64(in);
  const auto D = detail::read_u64(in);
  const double sigma = detail::read_f64(in);
  const auto seed = detail::read_u64(in);
  validate(kind, d, D, sigma);
  const std::size_t width = projection_width(kind, D);
  Matrix projection(d, width, detail::read_f64s(in, d * width));
  Vector phase = detail::read_f64s(in, kind == EncoderKind::onlinehd ? D : 0);
  return from_parts(kind, d, D, sigma, seed, std::move(projection), std::move(phase));
}

void Encoder::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save(out);
}

Encoder Encoder::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load(in);
}

Vector normalize_l2(std::span<const double> x) {
  Vector out(x.begin(), x.end());
  normalize_l2_inplace(out);
  return out;
}

void normalize_l2_inplace(std::span<double> x) {
  const double n = norm(x);
  if (n <= kNormEpsilon) return;
  for (double& v : x) v /= n;
}

EncoderKind parse_encoder_kind(const std::string& name) {
  if (name == "onlinehd") return EncoderKind::onlinehd;
  if (name == "rff") return EncoderKind::rff;
  throw std::invalid_argument("unknown encoder kind '" + name + "'");
}

std::string to_string(EncoderKind kind) {
  return kind == EncoderKind::rff ? "rff" : "onlinehd";
}

}  // namespace mmhdc
