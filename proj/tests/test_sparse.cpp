#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "spots/sparse.hpp"

using namespace spots;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("sparse_" + name + ".tmp") {}
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

// 4x3, group 2: col 0 all zero, col 1 top block only, col 2 both blocks.
Mat16 small_example() {
  Mat16 w(4, 3);
  w.at(0, 1) = 1;
  w.at(1, 2) = 5;
  w.at(2, 2) = 6;
  return w;
}

Mat16 random_blocky(std::mt19937& rng, int rows, int cols, int group, double zero_prob) {
  Mat16 w(rows, cols);
  for (auto& v : w.values) v = static_cast<i16>(rng() % 2001) - 1000;
  const int blocks = (rows + group - 1) / group;
  for (int j = 0; j < cols; ++j)
    for (int b = 0; b < blocks; ++b)
      if (rng() % 1000 < zero_prob * 1000)
        for (int r = b * group; r < std::min(rows, (b + 1) * group); ++r) w.at(r, j) = 0;
  return w;
}

}  // namespace

TEST_CASE("groupwise pruning drops below threshold, ties survive") {
  Mat16 w(2, 3);
  w.at(0, 0) = 4;  w.at(1, 0) = -4;  // max 4
  w.at(0, 1) = 5;  w.at(1, 1) = 0;   // max 5, tie with threshold
  w.at(0, 2) = -6; w.at(1, 2) = 1;   // max 6
  PruneConfig pc;
  pc.group = 2;
  pc.threshold = 5;
  Mat16 p = prune_groupwise(w, pc);
  CHECK(p.at(0, 0) == 0);
  CHECK(p.at(1, 0) == 0);
  CHECK(p.at(0, 1) == 5);
  CHECK(p.at(0, 2) == -6);
  CHECK(p.at(1, 2) == 1);
}

TEST_CASE("l2 pruning compares exactly in squared space") {
  Mat16 w(2, 2);
  w.at(0, 0) = 3; w.at(1, 0) = 4;  // norm exactly 5
  w.at(0, 1) = 3; w.at(1, 1) = 3;  // norm sqrt(18) < 5
  PruneConfig pc;
  pc.group = 2;
  pc.threshold = 5;
  pc.norm = PruneNorm::kL2;
  Mat16 p = prune_groupwise(w, pc);
  CHECK(p.at(0, 0) == 3);  // tie survives
  CHECK(p.at(1, 0) == 4);
  CHECK(p.at(0, 1) == 0);
  CHECK(p.at(1, 1) == 0);
}

TEST_CASE("zero threshold never prunes") {
  std::mt19937 rng(3);
  Mat16 w = random_blocky(rng, 8, 8, 4, 0.3);
  PruneConfig pc;
  Mat16 p = prune_groupwise(w, pc);
  CHECK(p.values == w.values);
}

TEST_CASE("bitmaps of the small example") {
  BlockSparseWeights s = encode_blocksparse(small_example(), 2, 2);
  CHECK(s.filters == 4);
  CHECK(s.cols == 3);
  CHECK(s.group == 2);
  CHECK(s.blocks_per_col() == 2);
  CHECK(s.nonzero_cols() == 2);

  CHECK_FALSE(s.col_bit(0));
  CHECK(s.col_bit(1));
  CHECK(s.col_bit(2));
  REQUIRE(s.col_mask.size() == 1);
  CHECK(s.col_mask[0] == 0x06);  // LSB first: cols 1 and 2

  // block bits, column-major over surviving columns
  CHECK(s.block_bit(0, 0));
  CHECK_FALSE(s.block_bit(0, 1));
  CHECK(s.block_bit(1, 0));
  CHECK(s.block_bit(1, 1));
  REQUIRE(s.block_mask.size() == 1);
  CHECK(s.block_mask[0] == 0x0D);  // bits 1,0,1,1 packed LSB first

  CHECK(s.col_rank(1) == 0);
  CHECK(s.col_rank(2) == 1);
  CHECK(s.stored_values() == 6);

  // blocks land in bank (blockRow % bankCount)
  REQUIRE(s.banks.size() == 2);
  CHECK(s.banks[0] == std::vector<i16>{1, 0, 0, 5});
  CHECK(s.banks[1] == std::vector<i16>{6, 0});
}

TEST_CASE("footprints of the small example") {
  BlockSparseWeights s = encode_blocksparse(small_example(), 2, 2);
  CHECK(footprint_blocksparse(s) == 1 + 1 + 12);
  CHECK(footprint_csr(small_example()) == 6 * 3 + 4 * 5);
}

TEST_CASE("footprint formulas on the dense 128x576 reference shape") {
  Mat16 w(128, 576);
  for (auto& v : w.values) v = 1;
  BlockSparseWeights s = encode_blocksparse(w, 4, 4);
  CHECK(s.nonzero_cols() == 576);
  CHECK(s.stored_values() == 73728);
  // ceil(576/8) + 576*ceil(128/4)/8 + 2*73728
  CHECK(footprint_blocksparse(s) == 72 + 2304 + 147456);
  CHECK(footprint_blocksparse(s) == 149832);
  // column pointers are 4-byte, indices 2-byte, values 2-byte
  CHECK(footprint_csr(w) == 442884);
}

TEST_CASE("encode and decode are inverse on blocky matrices") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int rows = 1 + static_cast<int>(rng() % 40);
    const int cols = 1 + static_cast<int>(rng() % 40);
    const int group = 1 + static_cast<int>(rng() % 6);
    const int banks = 1 + static_cast<int>(rng() % 5);
    Mat16 w = random_blocky(rng, rows, cols, group, 0.5);
    BlockSparseWeights s = encode_blocksparse(w, group, banks);
    Mat16 d = decode_blocksparse(s);
    REQUIRE(d.rows == rows);
    REQUIRE(d.cols == cols);
    CHECK(d.values == w.values);
  }
}

TEST_CASE("all-zero matrix encodes to empty banks") {
  Mat16 w(8, 4);
  BlockSparseWeights s = encode_blocksparse(w, 4, 2);
  CHECK(s.nonzero_cols() == 0);
  CHECK(s.stored_values() == 0);
  CHECK(s.block_mask.empty());
  Mat16 d = decode_blocksparse(s);
  CHECK(d.values == w.values);
}

TEST_CASE("ragged final block pads bank storage") {
  Mat16 w(5, 1);
  for (int r = 0; r < 5; ++r) w.at(r, 0) = static_cast<i16>(r + 1);
  BlockSparseWeights s = encode_blocksparse(w, 4, 1);
  CHECK(s.blocks_per_col() == 2);
  CHECK(s.stored_values() == 8);  // 4 real + row 4 padded out to a full block
  Mat16 d = decode_blocksparse(s);
  CHECK(d.values == w.values);
}

TEST_CASE("bank assignment is block row modulo bank count") {
  Mat16 w(12, 1);
  for (int r = 0; r < 12; ++r) w.at(r, 0) = static_cast<i16>(r + 1);
  BlockSparseWeights s = encode_blocksparse(w, 2, 3);
  REQUIRE(s.banks.size() == 3);
  CHECK(s.banks[0] == std::vector<i16>{1, 2, 7, 8});    // block rows 0 and 3
  CHECK(s.banks[1] == std::vector<i16>{3, 4, 9, 10});   // block rows 1 and 4
  CHECK(s.banks[2] == std::vector<i16>{5, 6, 11, 12});  // block rows 2 and 5
}

TEST_CASE("gather_column reproduces dense columns") {
  std::mt19937 rng(9);
  Mat16 w = random_blocky(rng, 24, 10, 4, 0.6);
  BlockSparseWeights s = encode_blocksparse(w, 4, 4);
  std::vector<i16> col(24);
  for (int j = 0; j < 10; ++j) {
    s.gather_column(j, col.data());
    for (int r = 0; r < 24; ++r) CHECK(col[r] == w.at(r, j));
  }
}

TEST_CASE("packed form beats csr at half-zero blocks") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int rows = 8 + static_cast<int>(rng() % 57);
    const int cols = 8 + static_cast<int>(rng() % 57);
    const int group = 2 + static_cast<int>(rng() % 7);
    const double zero = 0.5 + 0.4 * static_cast<double>(rng() % 1000) / 1000.0;
    Mat16 w = random_blocky(rng, rows, cols, group, zero);
    BlockSparseWeights s = encode_blocksparse(w, group, 4);
    CHECK(footprint_blocksparse(s) < footprint_csr(w));
  }
}

TEST_CASE("sbsw round trip") {
  TempFile f("roundtrip");
  std::mt19937 rng(21);
  Mat16 w = random_blocky(rng, 20, 14, 4, 0.5);
  BlockSparseWeights s = encode_blocksparse(w, 4, 3);
  write_sbsw(f.path, s);
  BlockSparseWeights r = read_sbsw(f.path);
  CHECK(r.filters == s.filters);
  CHECK(r.cols == s.cols);
  CHECK(r.group == s.group);
  CHECK(r.bank_count == s.bank_count);
  CHECK(r.col_mask == s.col_mask);
  CHECK(r.block_mask == s.block_mask);
  CHECK(r.banks == s.banks);
  CHECK(decode_blocksparse(r).values == w.values);
}

TEST_CASE("sbsw rejects corrupted files") {
  TempFile f("bad");
  BlockSparseWeights s = encode_blocksparse(small_example(), 2, 2);
  write_sbsw(f.path, s);
  const std::vector<unsigned char> good = slurp(f.path);
  // layout: magic 4, version 1, reserved 3, four u32 fields, M1 byte at 24,
  // M2 byte at 25, two u32 bank counts, then values

  SUBCASE("bad magic") {
    auto b = good;
    b[0] = 'Z';
    spit(f.path, b);
    CHECK_THROWS_AS(read_sbsw(f.path), std::runtime_error);
  }
  SUBCASE("bad version") {
    auto b = good;
    b[4] = 2;
    spit(f.path, b);
    CHECK_THROWS_AS(read_sbsw(f.path), std::runtime_error);
  }
  SUBCASE("stray bit in the column mask") {
    auto b = good;
    b[24] |= 0x08;  // col 3 of 3
    spit(f.path, b);
    CHECK_THROWS_WITH_AS(read_sbsw(f.path), doctest::Contains("column mask"),
                         std::runtime_error);
  }
  SUBCASE("stray bit in the block mask") {
    auto b = good;
    b[25] |= 0x20;  // only 4 block bits are in use
    spit(f.path, b);
    CHECK_THROWS_AS(read_sbsw(f.path), std::runtime_error);
  }
  SUBCASE("bank count disagrees with the block mask") {
    auto b = good;
    b[26] += 2;  // bank 0 claims one more block
    spit(f.path, b);
    CHECK_THROWS_AS(read_sbsw(f.path), std::runtime_error);
  }
  SUBCASE("truncated values") {
    auto b = good;
    b.resize(b.size() - 2);
    spit(f.path, b);
    CHECK_THROWS_AS(read_sbsw(f.path), std::runtime_error);
  }
  SUBCASE("trailing bytes") {
    auto b = good;
    b.push_back(0);
    spit(f.path, b);
    CHECK_THROWS_AS(read_sbsw(f.path), std::runtime_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_sbsw("no_such_weights.sbsw"), std::runtime_error);
  }
}

TEST_CASE("encode validates its arguments") {
  Mat16 w(4, 4);
  CHECK_THROWS_AS(encode_blocksparse(w, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(encode_blocksparse(w, 2, 0), std::invalid_argument);
  Mat16 empty;
  CHECK_THROWS_AS(encode_blocksparse(empty, 2, 2), std::invalid_argument);
}
