#include "mmhdc/data_io.hpp"

#include <zlib.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mmhdc/encoding.hpp"

namespace mmhdc {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw IdxError(IdxErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes;
  std::uint8_t buf[1 << 16];
  int n = 0;
  while ((n = gzread(f, buf, sizeof buf)) > 0) bytes.insert(bytes.end(), buf, buf + n);
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw IdxError(IdxErrorKind::io, "read error in " + path.string());
  return bytes;
}

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t check_header(std::span<const std::uint8_t> bytes, std::uint32_t magic, std::size_t header_size) {
  if (bytes.size() < 4) throw IdxError(IdxErrorKind::truncated, "IDX file shorter than its magic number");
  const std::uint32_t found = read_be32(bytes, 0);
  if (found != magic) {
    std::ostringstream msg;
    msg << "bad IDX magic 0x" << std::hex << found << " (expected " << std::dec << magic << ")";
    throw IdxError(IdxErrorKind::bad_magic, msg.str());
  }
  if (bytes.size() < header_size) throw IdxError(IdxErrorKind::truncated, "truncated IDX header");
  return found;
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  check_header(bytes, kIdxImageMagic, 16);
  IdxImages img;
  img.count = read_be32(bytes, 4);
  img.rows = read_be32(bytes, 8);
  img.cols = read_be32(bytes, 12);
  const std::uint64_t n = std::uint64_t{img.count} * img.rows * img.cols;
  if (bytes.size() - 16 < n) {
    throw IdxError(IdxErrorKind::truncated, "IDX image data holds " + std::to_string(bytes.size() - 16) +
                                                " bytes, header promises " + std::to_string(n));
  }
  img.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(n));
  return img;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  check_header(bytes, kIdxLabelMagic, 8);
  const std::uint32_t n = read_be32(bytes, 4);
  if (bytes.size() - 8 < n) {
    throw IdxError(IdxErrorKind::truncated, "IDX label data holds " + std::to_string(bytes.size() - 8) +
                                                " bytes, header promises " + std::to_string(n));
  }
  return {bytes.begin() + 8, bytes.begin() + 8 + n};
}

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kIdxImageMagic);
  write_be32(out, images.count);
  write_be32(out, images.rows);
  write_be32(out, images.cols);
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

Matrix load_idx_images(const std::filesystem::path& path) {
  const IdxImages img = parse_idx_images(read_file_bytes(path));
  Matrix x(img.count, std::size_t{img.rows} * img.cols);
  auto& data = x.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = img.pixels[i] / 255.0;
  return x;
}

std::vector<int> load_idx_labels(const std::filesystem::path& path) {
  const auto raw = parse_idx_labels(read_file_bytes(path));
  return {raw.begin(), raw.end()};
}

void load_idx_pair(const std::filesystem::path& images, const std::filesystem::path& labels, Matrix& x,
                   std::vector<int>& y) {
  x = load_idx_images(images);
  y = load_idx_labels(labels);
  if (x.rows() != y.size()) {
    throw IdxError(IdxErrorKind::count_mismatch, images.filename().string() + " has " + std::to_string(x.rows()) +
                                                     " images but " + labels.filename().string() + " has " +
                                                     std::to_string(y.size()) + " labels");
  }
}

namespace {

std::filesystem::path find_idx(const std::filesystem::path& dir, const std::string& stem) {
  for (const char* suffix : {"", ".gz"}) {
    auto p = dir / (stem + suffix);
    if (std::filesystem::exists(p)) return p;
  }
  // Some mirrors use a dot instead of a dash before "idx".
  std::string dotted = stem;
  if (auto pos = dotted.find("-idx"); pos != std::string::npos) dotted[pos] = '.';
  for (const char* suffix : {"", ".gz"}) {
    auto p = dir / (dotted + suffix);
    if (std::filesystem::exists(p)) return p;
  }
  throw IdxError(IdxErrorKind::io, "missing " + stem + "[.gz] in " + dir.string());
}

}  // namespace

RawDataset load_idx_dataset(const std::filesystem::path& dir, const std::string& name) {
  RawDataset ds;
  ds.name = name;
  load_idx_pair(find_idx(dir, "train-images-idx3-ubyte"), find_idx(dir, "train-labels-idx1-ubyte"), ds.train_x,
                ds.train_y);
  load_idx_pair(find_idx(dir, "t10k-images-idx3-ubyte"), find_idx(dir, "t10k-labels-idx1-ubyte"), ds.test_x,
                ds.test_y);
  if (ds.train_x.cols() != ds.test_x.cols()) {
    throw IdxError(IdxErrorKind::count_mismatch, "train and test images differ in size");
  }
  ds.d = ds.train_x.cols();
  int max_label = 0;
  for (int y : ds.train_y) max_label = std::max(max_label, y);
  for (int y : ds.test_y) max_label = std::max(max_label, y);
  ds.num_classes = static_cast<std::size_t>(max_label) + 1;
  return ds;
}

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw HarError(HarErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path har_file(const std::filesystem::path& dir, const std::string& split, const std::string& file) {
  for (const auto& p : {dir / file, dir / split / file}) {
    if (std::filesystem::exists(p)) return p;
  }
  throw HarError(HarErrorKind::io, "missing " + file + " in " + dir.string());
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

template <class Fn>
void for_each_token(std::string_view line, Fn&& fn) {
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) fn(line.substr(start, i - start));
  }
}

double parse_double(std::string_view token, std::size_t line_no) {
  double v = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw HarError(HarErrorKind::non_numeric,
                   "line " + std::to_string(line_no) + ": non-numeric token '" + std::string(token) + "'");
  }
  return v;
}

template <class Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    bool blank = true;
    for (char c : line) blank = blank && is_space(c);
    if (!blank) fn(line, line_no);
    pos = end + 1;
  }
}

}  // namespace

Matrix parse_har_matrix(const std::string& text, std::size_t width) {
  std::vector<double> values;
  std::size_t rows = 0;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    std::size_t count = 0;
    for_each_token(line, [&](std::string_view tok) {
      values.push_back(parse_double(tok, line_no));
      ++count;
    });
    if (count != width) {
      throw HarError(HarErrorKind::ragged_row, "line " + std::to_string(line_no) + " has " + std::to_string(count) +
                                                   " values, expected " + std::to_string(width));
    }
    ++rows;
  });
  return Matrix(rows, width, std::move(values));
}

std::vector<int> parse_har_labels(const std::string& text, std::size_t num_classes) {
  std::vector<int> labels;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    std::size_t count = 0;
    for_each_token(line, [&](std::string_view tok) {
      ++count;
      const double v = parse_double(tok, line_no);
      if (v != std::floor(v) || v < 1 || v > static_cast<double>(num_classes)) {
        throw HarError(HarErrorKind::bad_label,
                       "line " + std::to_string(line_no) + ": label '" + std::string(tok) + "' outside 1.." +
                           std::to_string(num_classes));
      }
      labels.push_back(static_cast<int>(v) - 1);
    });
    if (count != 1) throw HarError(HarErrorKind::ragged_row, "line " + std::to_string(line_no) + " is not a single label");
  });
  return labels;
}

RawDataset load_har(const std::filesystem::path& dir, std::size_t features) {
  if (!std::filesystem::is_directory(dir)) throw HarError(HarErrorKind::io, dir.string() + " is not a directory");
  RawDataset ds;
  ds.name = "har";
  ds.train_x = parse_har_matrix(read_text(har_file(dir, "train", "X_train.txt")), features);
  ds.train_y = parse_har_labels(read_text(har_file(dir, "train", "y_train.txt")));
  ds.test_x = parse_har_matrix(read_text(har_file(dir, "test", "X_test.txt")), features);
  ds.test_y = parse_har_labels(read_text(har_file(dir, "test", "y_test.txt")));
  if (ds.train_x.rows() != ds.train_y.size() || ds.test_x.rows() != ds.test_y.size()) {
    throw HarError(HarErrorKind::count_mismatch, "HAR feature and label files differ in length");
  }
  ds.d = features;
  ds.num_classes = 6;
  return ds;
}

RawDataset load_dataset(const std::string& name, const std::filesystem::path& dir) {
  if (name == "mnist" || name == "fashion") return load_idx_dataset(dir, name);
  if (name == "har") return load_har(dir);
  throw std::invalid_argument("unknown dataset '" + name + "' (expected mnist, fashion or har)");
}

RawDataset preprocess(RawDataset raw) {
  for (auto* m : {&raw.train_x, &raw.test_x}) {
    for (std::size_t i = 0; i < m->rows(); ++i) normalize_l2_inplace(m->row(i));
  }
  return raw;
}

void truncate(RawDataset& raw, std::size_t train_limit, std::size_t test_limit) {
  auto cut = [](Matrix& x, std::vector<int>& y, std::size_t limit) {
    if (limit == 0 || limit >= x.rows()) return;
    x = x.select_rows(all_rows(limit));
    y.resize(limit);
  };
  cut(raw.train_x, raw.train_y, train_limit);
  cut(raw.test_x, raw.test_y, test_limit);
}

SeparableSet make_separable(std::size_t n_per_class, std::size_t dim, double margin, std::uint64_t seed) {
  if (!(margin > 0.0)) throw std::invalid_argument("margin must be positive");
  if (dim == 0 || n_per_class == 0) throw std::invalid_argument("make_separable needs dim >= 1 and n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SeparableSet out;
  out.direction.resize(dim);
  do {
    for (double& v : out.direction) v = normal(rng);
  } while (norm(out.direction) <= kNormEpsilon);
  normalize_l2_inplace(out.direction);

  const std::size_t n = 2 * n_per_class;
  out.data.points = Matrix(n, dim);
  out.data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i % 2 == 0 ? 1 : -1;
    auto x = out.data.points.row(i);
    do {
      for (std::size_t k = 0; k < dim; ++k) x[k] = y * (margin / 2.0) * out.direction[k] + normal(rng);
    } while (y * dot(x, out.direction) < margin / 4.0);
    out.data.labels[i] = y;
  }
  return out;
}

}  // namespace mmhdc
