#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mmhdc/data_io.hpp"

using namespace mmhdc;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = MMHDC_FIXTURE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("mmhdc_data_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

template <class Kind, class Fn>
Kind error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const IdxError& e) {
    if constexpr (std::is_same_v<Kind, IdxErrorKind>) return e.kind();
  } catch (const HarError& e) {
    if constexpr (std::is_same_v<Kind, HarErrorKind>) return e.kind();
  }
  FAIL("expected a loader error");
  return Kind{};
}

}  // namespace

TEST_CASE("tiny IDX fixture") {
  const Matrix x = load_idx_images(kFixtures / "tiny-images-idx3-ubyte");
  REQUIRE(x.rows() == 2);
  REQUIRE(x.cols() == 4);
  const Vector expected{0.0, 0.2, 0.4, 1.0, 1.0, 0.8, 0.0, 1.0 / 255.0};
  for (std::size_t k = 0; k < 8; ++k) CHECK(x.data()[k] == doctest::Approx(expected[k]).epsilon(1e-15));
  CHECK(load_idx_labels(kFixtures / "tiny-labels-idx1-ubyte") == std::vector<int>{7, 3});
}

TEST_CASE("IDX round trip is bit exact") {
  for (const char* name : {"tiny-images-idx3-ubyte"}) {
    const auto bytes = read_file_bytes(kFixtures / name);
    const IdxImages img = parse_idx_images(bytes);
    CHECK(img.count == 2);
    CHECK(img.rows == 2);
    CHECK(img.cols == 2);
    CHECK(serialize_idx_images(img) == bytes);
  }
  const auto lbytes = read_file_bytes(kFixtures / "tiny-labels-idx1-ubyte");
  CHECK(serialize_idx_labels(parse_idx_labels(lbytes)) == lbytes);
}

TEST_CASE("IDX error taxonomy") {
  CHECK(error_kind<IdxErrorKind>([] { load_idx_images(kFixtures / "bad-magic-idx3-ubyte"); }) ==
        IdxErrorKind::bad_magic);
  CHECK(error_kind<IdxErrorKind>([] { load_idx_labels(kFixtures / "tiny-images-idx3-ubyte"); }) ==
        IdxErrorKind::bad_magic);
  CHECK(error_kind<IdxErrorKind>([] { load_idx_images(kFixtures / "truncated-images-idx3-ubyte"); }) ==
        IdxErrorKind::truncated);
  CHECK(error_kind<IdxErrorKind>([] { load_idx_images(kFixtures / "does-not-exist"); }) == IdxErrorKind::io);
  CHECK(error_kind<IdxErrorKind>([] {
          Matrix x;
          std::vector<int> y;
          load_idx_pair(kFixtures / "tiny-images-idx3-ubyte", kFixtures / "three-labels-idx1-ubyte", x, y);
        }) == IdxErrorKind::count_mismatch);
  const std::vector<std::uint8_t> stub{0, 0, 8};
  CHECK(error_kind<IdxErrorKind>([&] { parse_idx_labels(stub); }) == IdxErrorKind::truncated);
}

TEST_CASE("gzipped MNIST subset") {
  const fs::path dir = fs::path(MMHDC_DATA_DIR) / "mnist-subset";
  const RawDataset raw = load_dataset("mnist", dir);
  CHECK(raw.train_x.rows() == 8000);
  CHECK(raw.test_x.rows() == 2000);
  CHECK(raw.d == 784);
  CHECK(raw.num_classes == 10);
  for (int y : raw.train_y) REQUIRE((y >= 0 && y < 10));
  double lo = 1, hi = 0;
  for (double v : raw.train_x.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
}

TEST_CASE("plain and gzipped files read the same") {
  const fs::path dir = scratch_dir("plain");
  const fs::path gz = fs::path(MMHDC_DATA_DIR) / "mnist-subset" / "t10k-labels-idx1-ubyte.gz";
  const auto bytes = read_file_bytes(gz);
  {
    std::ofstream out(dir / "t10k-labels-idx1-ubyte", std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK(load_idx_labels(dir / "t10k-labels-idx1-ubyte") == load_idx_labels(gz));
  CHECK(bytes.size() == 8 + 2000);
}

TEST_CASE("HAR fixture") {
  const RawDataset har = load_har(kFixtures / "har");
  CHECK(har.train_x.rows() == 3);
  CHECK(har.train_x.cols() == 561);
  CHECK(har.test_x.rows() == 2);
  CHECK(har.d == 561);
  CHECK(har.num_classes == 6);
  CHECK(har.train_y == std::vector<int>{0, 5, 2});
  CHECK(har.test_y == std::vector<int>{1, 4});
  CHECK(har.train_x(0, 0) == -1.0);
  CHECK(har.train_x(0, 1) == doctest::Approx(-0.89));
  CHECK(load_dataset("har", kFixtures / "har").train_x == har.train_x);
}

TEST_CASE("HAR split directories") {
  const fs::path dir = scratch_dir("har_split");
  fs::create_directories(dir / "train");
  fs::create_directories(dir / "test");
  for (const char* split : {"train", "test"}) {
    fs::copy_file(kFixtures / "har" / (std::string("X_") + split + ".txt"), dir / split / (std::string("X_") + split + ".txt"));
    fs::copy_file(kFixtures / "har" / (std::string("y_") + split + ".txt"), dir / split / (std::string("y_") + split + ".txt"));
  }
  CHECK(load_har(dir).train_y == std::vector<int>{0, 5, 2});
}

TEST_CASE("HAR error taxonomy") {
  CHECK(error_kind<HarErrorKind>([] { parse_har_matrix(slurp(kFixtures / "har-ragged.txt"), 561); }) ==
        HarErrorKind::ragged_row);
  CHECK(error_kind<HarErrorKind>([] { parse_har_matrix(slurp(kFixtures / "har-nonnumeric.txt"), 561); }) ==
        HarErrorKind::non_numeric);
  CHECK(error_kind<HarErrorKind>([] { parse_har_labels("1\n7\n"); }) == HarErrorKind::bad_label);
  CHECK(error_kind<HarErrorKind>([] { parse_har_labels("1\nwalk\n"); }) == HarErrorKind::non_numeric);
  CHECK(error_kind<HarErrorKind>([] { load_har(kFixtures / "nowhere"); }) == HarErrorKind::io);

  const fs::path dir = scratch_dir("har_mismatch");
  for (const char* f : {"X_train.txt", "X_test.txt", "y_test.txt"}) fs::copy_file(kFixtures / "har" / f, dir / f);
  std::ofstream(dir / "y_train.txt") << "1\n2\n";
  CHECK(error_kind<HarErrorKind>([&] { load_har(dir); }) == HarErrorKind::count_mismatch);
}

TEST_CASE("HAR label shift") {
  CHECK(parse_har_labels("1\n") == std::vector<int>{0});
  CHECK(parse_har_labels(" 6 \n 2\n") == std::vector<int>{5, 1});
  const Matrix m = parse_har_matrix("1 2 3\n\n4e-1 -5 6\n", 3);
  CHECK(m.rows() == 2);
  CHECK(m(1, 0) == 0.4);
}

TEST_CASE("preprocess and truncate") {
  RawDataset raw = load_har(kFixtures / "har");
  raw.train_x(2, 0) = 0.0;
  const RawDataset pre = preprocess(raw);
  for (std::size_t i = 0; i < pre.train_x.rows(); ++i) CHECK(std::abs(norm(pre.train_x.row(i)) - 1.0) <= 1e-9);
  for (std::size_t i = 0; i < pre.test_x.rows(); ++i) CHECK(std::abs(norm(pre.test_x.row(i)) - 1.0) <= 1e-9);

  RawDataset zero = raw;
  for (auto& v : zero.test_x.row(0)) v = 0.0;
  CHECK(preprocess(zero).test_x.row(0)[5] == 0.0);

  truncate(raw, 2, 1);
  CHECK(raw.train_x.rows() == 2);
  CHECK(raw.train_y.size() == 2);
  CHECK(raw.test_x.rows() == 1);
  truncate(raw, 0, 0);
  CHECK(raw.train_x.rows() == 2);
}

TEST_CASE("unknown dataset") {
  CHECK_THROWS_AS(load_dataset("cifar", kFixtures), std::invalid_argument);
}

TEST_CASE("make_separable") {
  const SeparableSet one = make_separable(1, 3, 2.0, 0);
  CHECK(one.data.points.rows() == 2);
  CHECK(one.data.labels == std::vector<int>{1, -1});

  const SeparableSet a = make_separable(25, 4, 1.5, 8);
  const SeparableSet b = make_separable(25, 4, 1.5, 8);
  CHECK(a.data.points == b.data.points);
  CHECK(a.direction == b.direction);
  CHECK(norm(a.direction) == doctest::Approx(1.0));
  for (std::size_t i = 0; i < 50; ++i) CHECK(a.data.labels[i] * dot(a.data.points.row(i), a.direction) >= 1.5 / 4);

  const SeparableSet wide = make_separable(50, 2, 10.0, 3);
  PrototypePair p(2);
  std::size_t mistakes = 1;
  for (int e = 0; e < 50 && mistakes > 0; ++e) mistakes = perceptron_epoch(p, wide.data.points, wide.data.labels, 0.5);
  CHECK(mistakes == 0);
}
