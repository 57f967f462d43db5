#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>

#include "mmhdc/linalg.hpp"

namespace mmhdc {

enum class EncoderKind : std::uint64_t { onlinehd = 0, rff = 1 };

/// A hypervector is a dense real vector of length D.
using HyperVector = Vector;

/// Seeded random feature map from R^d to R^D.
///
/// onlinehd: theta(x)_k = cos(<x, W_k> + phi_k) * sin(<x, W_k>), W ~ N(0, 1),
///           phi ~ U[0, 2pi). W is d x D.
/// rff:      theta(x) = sqrt(2/D) [cos(x W'), sin(x W')], W' ~ N(0, 1/sigma^2)
///           with width D/2, so <theta(x), theta(y)> estimates the RBF kernel
///           exp(-|x-y|^2 / (2 sigma^2)). phi is empty.
///
/// Sampling order is W row-major, then phi, from one mt19937_64 stream.
/// Immutable after construction; encode() is safe to call concurrently.
class Encoder {
 public:
  static Encoder sample(EncoderKind kind, std::size_t input_dim, std::size_t output_dim,
                        double sigma, std::uint64_t seed);

  /// Rebuilds an encoder from stored parameters without re-sampling.
  static Encoder from_parts(EncoderKind kind, std::size_t input_dim, std::size_t output_dim,
                            double sigma, std::uint64_t seed, Matrix projection, Vector phase);

  HyperVector encode(std::span<const double> x) const;
  void encode_into(std::span<const double> x, std::span<double> out) const;
  Matrix encode_batch(const Matrix& points, unsigned threads = 0) const;

  EncoderKind kind() const { return kind_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  double sigma() const { return sigma_; }
  std::uint64_t seed() const { return seed_; }
  const Matrix& projection() const { return projection_; }
  const Vector& phase() const { return phase_; }

  /// Header (kind, d, D, sigma, seed; 64-bit little-endian) then W then phi.
  void save(std::ostream& out) const;
  static Encoder load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Encoder load(const std::filesystem::path& path);

  bool operator==(const Encoder&) const = default;

 private:
  Encoder() = default;

  EncoderKind kind_ = EncoderKind::onlinehd;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  double sigma_ = 1.0;
  std::uint64_t seed_ = 0;
  Matrix projection_;
  Vector phase_;
};

inline Encoder new_encoder(EncoderKind kind, std::size_t input_dim, std::size_t output_dim,
                           double sigma, std::uint64_t seed) {
  return Encoder::sample(kind, input_dim, output_dim, sigma, seed);
}

inline constexpr double kNormEpsilon = 1e-12;

/// x / |x|_2, or x unchanged when |x|_2 <= 1e-12.
Vector normalize_l2(std::span<const double> x);
void normalize_l2_inplace(std::span<double> x);

EncoderKind parse_encoder_kind(const std::string& name);
std::string to_string(EncoderKind kind);

}  // namespace mmhdc
