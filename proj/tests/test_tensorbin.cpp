#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "spots/tensor.hpp"

using namespace spots;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("tensorbin_" + name + ".tmp") {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("feature map round trip") {
  TempFile f("feat");
  FeatureMap x(3, 4, 5);
  std::mt19937 rng(1);
  for (auto& v : x.values) v = static_cast<i16>(rng() % 65536 - 32768);
  write_tensor(f.path, to_tensor(x));
  FeatureMap y = feature_from_tensor(read_tensor(f.path));
  CHECK(y.channels == 3);
  CHECK(y.height == 4);
  CHECK(y.width == 5);
  CHECK(y.values == x.values);
}

TEST_CASE("matrix and filter set round trips") {
  TempFile f("mat");
  Mat16 m(7, 3);
  for (size_t i = 0; i < m.values.size(); ++i) m.values[i] = static_cast<i16>(i * 31 - 200);
  write_tensor(f.path, to_tensor(m));
  Mat16 n = mat_from_tensor(read_tensor(f.path));
  CHECK(n.rows == 7);
  CHECK(n.cols == 3);
  CHECK(n.values == m.values);

  TempFile g("filt");
  FilterSet fs(2, 3, 4, 5);
  for (size_t i = 0; i < fs.values.size(); ++i) fs.values[i] = static_cast<i16>(i);
  write_tensor(g.path, to_tensor(fs));
  TensorFile t = read_tensor(g.path);
  REQUIRE(t.dims.size() == 4);
  CHECK(t.dims[0] == 2);
  CHECK(t.dims[1] == 3);
  CHECK(t.dims[2] == 4);
  CHECK(t.dims[3] == 5);
  CHECK(t.values == fs.values);
}

TEST_CASE("exact on-disk byte layout") {
  TempFile f("bytes");
  FeatureMap x(1, 1, 2);
  x.values = {1, -2};
  write_tensor(f.path, to_tensor(x));
  const std::vector<unsigned char> want = {
      'S', 'T', 'N', 'S',       // magic
      1,                        // version
      0,                        // dtype int16
      3,                        // rank
      0, 0, 0,                  // reserved
      1, 0, 0, 0,               // dim 0
      1, 0, 0, 0,               // dim 1
      2, 0, 0, 0,               // dim 2
      1, 0,                     // +1 little endian
      0xFE, 0xFF,               // -2 little endian
  };
  CHECK(slurp(f.path) == want);
}

TEST_CASE("malformed files are rejected with reasons") {
  TempFile f("bad");
  FeatureMap x(1, 1, 2);
  x.values = {1, -2};
  write_tensor(f.path, to_tensor(x));
  const std::vector<unsigned char> good = slurp(f.path);

  SUBCASE("bad magic") {
    auto b = good;
    b[0] = 'X';
    spit(f.path, b);
    CHECK_THROWS_WITH_AS(read_tensor(f.path), doctest::Contains("magic"), std::runtime_error);
  }
  SUBCASE("unsupported version") {
    auto b = good;
    b[4] = 9;
    spit(f.path, b);
    CHECK_THROWS_WITH_AS(read_tensor(f.path), doctest::Contains("version"), std::runtime_error);
  }
  SUBCASE("unsupported dtype") {
    auto b = good;
    b[5] = 7;
    spit(f.path, b);
    CHECK_THROWS_AS(read_tensor(f.path), std::runtime_error);
  }
  SUBCASE("nonzero reserved byte") {
    auto b = good;
    b[8] = 1;
    spit(f.path, b);
    CHECK_THROWS_AS(read_tensor(f.path), std::runtime_error);
  }
  SUBCASE("zero rank") {
    auto b = good;
    b[6] = 0;
    spit(f.path, b);
    CHECK_THROWS_AS(read_tensor(f.path), std::runtime_error);
  }
  SUBCASE("zero dimension") {
    auto b = good;
    b[10] = 0;  // dim 0 low byte
    spit(f.path, b);
    CHECK_THROWS_AS(read_tensor(f.path), std::runtime_error);
  }
  SUBCASE("truncated header") {
    spit(f.path, {'S', 'T', 'N', 'S', 1});
    CHECK_THROWS_AS(read_tensor(f.path), std::runtime_error);
  }
  SUBCASE("truncated payload") {
    auto b = good;
    b.pop_back();
    spit(f.path, b);
    CHECK_THROWS_AS(read_tensor(f.path), std::runtime_error);
  }
  SUBCASE("trailing bytes") {
    auto b = good;
    b.push_back(0);
    spit(f.path, b);
    CHECK_THROWS_AS(read_tensor(f.path), std::runtime_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_tensor("no_such_tensor_file.stns"), std::runtime_error);
  }
}

TEST_CASE("shape guards on conversion helpers") {
  TensorFile t = to_tensor(Mat16(2, 2));
  CHECK_THROWS_AS(feature_from_tensor(t), std::runtime_error);
  TensorFile u = to_tensor(FeatureMap(1, 2, 2));
  CHECK_THROWS_AS(mat_from_tensor(u), std::runtime_error);
}
