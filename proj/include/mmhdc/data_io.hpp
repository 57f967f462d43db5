#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmhdc/hdc_core.hpp"
#include "mmhdc/linalg.hpp"

namespace mmhdc {

enum class IdxErrorKind { io, bad_magic, truncated, count_mismatch };

class IdxError : public std::runtime_error {
 public:
  IdxError(IdxErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  IdxErrorKind kind() const { return kind_; }

 private:
  IdxErrorKind kind_;
};

enum class HarErrorKind { io, ragged_row, non_numeric, bad_label, count_mismatch };

class HarError : public std::runtime_error {
 public:
  HarError(HarErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  HarErrorKind kind() const { return kind_; }

 private:
  HarErrorKind kind_;
};

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;

/// Raw contents of an IDX image file (unsigned byte pixels).
struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;  ///< count * rows * cols, row-major
};

/// Reads a file, transparently inflating gzip.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images);
std::vector<std::uint8_t> serialize_idx_labels(std::span<const std::uint8_t> labels);

/// N x (rows*cols) matrix of pixels scaled to [0, 1].
Matrix load_idx_images(const std::filesystem::path& path);
std::vector<int> load_idx_labels(const std::filesystem::path& path);

struct RawDataset {
  std::string name;
  Matrix train_x;
  std::vector<int> train_y;
  Matrix test_x;
  std::vector<int> test_y;
  std::size_t d = 0;
  std::size_t num_classes = 0;
};

/// Images and labels from two IDX files; throws count_mismatch if N differs.
void load_idx_pair(const std::filesystem::path& images, const std::filesystem::path& labels, Matrix& x,
                   std::vector<int>& y);

/// MNIST-layout directory: {train,t10k}-{images-idx3,labels-idx1}-ubyte[.gz].
RawDataset load_idx_dataset(const std::filesystem::path& dir, const std::string& name);

/// UCI HAR text files X_train.txt, y_train.txt, X_test.txt, y_test.txt, either
/// directly in `dir` or under dir/train and dir/test. Labels 1..6 become 0..5.
RawDataset load_har(const std::filesystem::path& dir, std::size_t features = 561);

/// Whitespace-separated float rows, each with exactly `width` values.
Matrix parse_har_matrix(const std::string& text, std::size_t width);
/// One label per line in 1..num_classes, shifted to 0-based.
std::vector<int> parse_har_labels(const std::string& text, std::size_t num_classes = 6);

/// mnist | fashion | har
RawDataset load_dataset(const std::string& name, const std::filesystem::path& dir);

/// Unit l2 norm for every train and test point.
RawDataset preprocess(RawDataset raw);

/// Keeps the first `train_limit` / `test_limit` points (0 = keep all).
void truncate(RawDataset& raw, std::size_t train_limit, std::size_t test_limit);

struct SeparableSet {
  LabeledSet data;
  Vector direction;  ///< unit vector u used to generate the set
};

/// Two Gaussian clouds around +-(margin/2) u; points with y <x, u> < margin/4
/// are redrawn, so the set is separable through the origin by u.
/// Labels alternate +1, -1, +1, ...
SeparableSet make_separable(std::size_t n_per_class, std::size_t dim, double margin, std::uint64_t seed);

}  // namespace mmhdc
