#pragma once

// Little-endian 64-bit field helpers shared by the model file writers.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmhdc::detail {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void write_f64s(std::ostream& out, std::span<const double> v) {
  for (double x : v) write_f64(out, x);
}

inline std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw FormatError("unexpected end of model data");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

inline double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

inline std::vector<double> read_f64s(std::istream& in, std::uint64_t n) {
  // Guard against absurd sizes from corrupt headers before allocating.
  if (n > (std::uint64_t{1} << 34)) throw FormatError("implausible vector length " + std::to_string(n));
  std::vector<double> v(n);
  for (auto& x : v) x = read_f64(in);
  return v;
}

}  // namespace mmhdc::detail
