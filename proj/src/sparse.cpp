#include "spots/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace spots {

namespace {

void check_geometry(int filters, int cols, int group, int bank_count) {
  if (filters < 1 || cols < 1) throw std::invalid_argument("weight matrix is empty");
  if (group < 1) throw std::invalid_argument("prune group must be positive");
  if (bank_count < 1) throw std::invalid_argument("bank count must be positive");
}

void set_bit(std::vector<u8>& bits, size_t i) { bits[i >> 3] |= static_cast<u8>(1u << (i & 7)); }

}  // namespace

Mat16 prune_groupwise(const Mat16& w, const PruneConfig& cfg) {
  check_geometry(w.rows, w.cols, cfg.group, 1);
  if (cfg.threshold < 0) throw std::invalid_argument("prune threshold must be non-negative");

  Mat16 out = w;
  for (int j = 0; j < w.cols; ++j) {
    for (int b0 = 0; b0 < w.rows; b0 += cfg.group) {
      const int b1 = std::min(b0 + cfg.group, w.rows);
      bool drop;
      if (cfg.norm == PruneNorm::kMaxAbs) {
        i32 m = 0;
        for (int r = b0; r < b1; ++r) m = std::max(m, std::abs(static_cast<i32>(w.at(r, j))));
        drop = m < cfg.threshold;
      } else {
        // Compare squared norms so the decision stays exact in integers.
        i64 ss = 0;
        for (int r = b0; r < b1; ++r) {
          const i64 v = w.at(r, j);
          ss += v * v;
        }
        drop = ss < static_cast<i64>(cfg.threshold) * cfg.threshold;
      }
      if (drop)
        for (int r = b0; r < b1; ++r) out.at(r, j) = 0;
    }
  }
  return out;
}

int BlockSparseWeights::nonzero_cols() const {
  int n = 0;
  for (int j = 0; j < cols; ++j) n += col_bit(j);
  return n;
}

u64 BlockSparseWeights::stored_values() const {
  u64 n = 0;
  for (const auto& b : banks) n += b.size();
  return n;
}

int BlockSparseWeights::col_block_count(int j) const {
  if (!col_bit(j)) return 0;
  const int rank = rank_[j];
  int n = 0;
  for (int b = 0; b < blocks_per_col(); ++b) n += block_bit(rank, b);
  return n;
}

void BlockSparseWeights::build_index() {
  rank_.assign(cols, -1);
  int rank = 0;
  for (int j = 0; j < cols; ++j)
    if (col_bit(j)) rank_[j] = rank++;

  bank_cursor_.assign(rank, std::vector<u32>(bank_count, 0));
  std::vector<u32> fill(bank_count, 0);
  for (int k = 0; k < rank; ++k) {
    bank_cursor_[k] = fill;
    for (int b = 0; b < blocks_per_col(); ++b)
      if (block_bit(k, b)) fill[b % bank_count] += group;
  }
}

void BlockSparseWeights::gather_column(int j, i16* out) const {
  std::fill(out, out + filters, static_cast<i16>(0));
  if (!col_bit(j)) return;
  const int rank = rank_[j];
  std::vector<u32> cursor = bank_cursor_[rank];
  for (int b = 0; b < blocks_per_col(); ++b) {
    if (!block_bit(rank, b)) continue;
    const int bank = b % bank_count;
    const int row0 = b * group;
    const int live = std::min(group, filters - row0);
    const i16* src = banks[bank].data() + cursor[bank];
    std::copy(src, src + live, out + row0);
    cursor[bank] += group;
  }
}

BlockSparseWeights encode_blocksparse(const Mat16& w, int group, int bank_count) {
  check_geometry(w.rows, w.cols, group, bank_count);

  BlockSparseWeights s;
  s.filters = w.rows;
  s.cols = w.cols;
  s.group = group;
  s.bank_count = bank_count;
  s.col_mask.assign((w.cols + 7) / 8, 0);
  s.banks.assign(bank_count, {});

  const int bpc = s.blocks_per_col();
  std::vector<int> nonzero;
  for (int j = 0; j < w.cols; ++j) {
    bool any = false;
    for (int r = 0; r < w.rows && !any; ++r) any = w.at(r, j) != 0;
    if (any) {
      set_bit(s.col_mask, j);
      nonzero.push_back(j);
    }
  }

  s.block_mask.assign((nonzero.size() * bpc + 7) / 8, 0);
  for (size_t k = 0; k < nonzero.size(); ++k) {
    const int j = nonzero[k];
    for (int b = 0; b < bpc; ++b) {
      const int row0 = b * group;
      const int row1 = std::min(row0 + group, w.rows);
      bool any = false;
      for (int r = row0; r < row1 && !any; ++r) any = w.at(r, j) != 0;
      if (!any) continue;
      set_bit(s.block_mask, k * bpc + b);
      auto& bank = s.banks[b % bank_count];
      for (int r = row0; r < row0 + group; ++r)
        bank.push_back(r < row1 ? w.at(r, j) : static_cast<i16>(0));
    }
  }

  s.build_index();
  return s;
}

Mat16 decode_blocksparse(const BlockSparseWeights& s) {
  Mat16 w(s.filters, s.cols);
  std::vector<i16> col(s.filters);
  for (int j = 0; j < s.cols; ++j) {
    s.gather_column(j, col.data());
    for (int r = 0; r < s.filters; ++r) w.at(r, j) = col[r];
  }
  return w;
}

u64 footprint_blocksparse(const BlockSparseWeights& s) {
  const u64 m1 = (static_cast<u64>(s.cols) + 7) / 8;
  const u64 m2 = (static_cast<u64>(s.nonzero_cols()) * s.blocks_per_col() + 7) / 8;
  return m1 + m2 + 2 * s.stored_values();
}

u64 footprint_csr(const Mat16& w) {
  u64 nnz = 0;
  for (i16 v : w.values) nnz += v != 0;
  return 2 * nnz + 4 * nnz + 4 * (static_cast<u64>(w.rows) + 1);
}

// ---------------------------------------------------------------------------
// SBSW container
// ---------------------------------------------------------------------------

namespace {

constexpr char kSbswMagic[4] = {'S', 'B', 'S', 'W'};
constexpr u8 kSbswVersion = 1;

void put_u32(std::string& out, u32 v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

u32 get_u32(const u8* p) {
  return static_cast<u32>(p[0]) | static_cast<u32>(p[1]) << 8 |
         static_cast<u32>(p[2]) << 16 | static_cast<u32>(p[3]) << 24;
}

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw std::runtime_error(path + ": " + why);
}

}  // namespace

void write_sbsw(const std::string& path, const BlockSparseWeights& s) {
  std::string buf;
  buf.append(kSbswMagic, 4);
  buf.push_back(static_cast<char>(kSbswVersion));
  buf.append(3, '\0');
  put_u32(buf, static_cast<u32>(s.filters));
  put_u32(buf, static_cast<u32>(s.cols));
  put_u32(buf, static_cast<u32>(s.group));
  put_u32(buf, static_cast<u32>(s.bank_count));
  buf.append(reinterpret_cast<const char*>(s.col_mask.data()), s.col_mask.size());
  buf.append(reinterpret_cast<const char*>(s.block_mask.data()), s.block_mask.size());
  for (const auto& bank : s.banks) put_u32(buf, static_cast<u32>(bank.size()));
  for (const auto& bank : s.banks)
    for (i16 v : bank) {
      const u32 u = static_cast<u32>(static_cast<std::uint16_t>(v));
      buf.push_back(static_cast<char>(u & 0xff));
      buf.push_back(static_cast<char>((u >> 8) & 0xff));
    }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) bad(path, "cannot open for writing");
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) bad(path, "write failed");
}

BlockSparseWeights read_sbsw(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) bad(path, "cannot open");
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const u8* p = reinterpret_cast<const u8*>(buf.data());
  size_t n = buf.size();

  if (n < 24) bad(path, "truncated header");
  if (std::memcmp(p, kSbswMagic, 4) != 0) bad(path, "bad magic, not a block-sparse file");
  if (p[4] != kSbswVersion) bad(path, "unsupported version");

  BlockSparseWeights s;
  s.filters = static_cast<int>(get_u32(p + 8));
  s.cols = static_cast<int>(get_u32(p + 12));
  s.group = static_cast<int>(get_u32(p + 16));
  s.bank_count = static_cast<int>(get_u32(p + 20));
  if (s.filters < 1 || s.cols < 1 || s.group < 1 || s.bank_count < 1)
    bad(path, "invalid geometry");

  size_t off = 24;
  const size_t m1_bytes = (static_cast<size_t>(s.cols) + 7) / 8;
  if (n < off + m1_bytes) bad(path, "truncated column mask");
  s.col_mask.assign(p + off, p + off + m1_bytes);
  off += m1_bytes;

  // Mask bits past the last column must be zero or the counts below lie.
  for (int j = s.cols; j < static_cast<int>(m1_bytes * 8); ++j)
    if ((s.col_mask[j >> 3] >> (j & 7)) & 1) bad(path, "stray bits in column mask");

  const size_t m2_bits = static_cast<size_t>(s.nonzero_cols()) * s.blocks_per_col();
  const size_t m2_bytes = (m2_bits + 7) / 8;
  if (n < off + m2_bytes) bad(path, "truncated block mask");
  s.block_mask.assign(p + off, p + off + m2_bytes);
  off += m2_bytes;
  for (size_t i = m2_bits; i < m2_bytes * 8; ++i)
    if ((s.block_mask[i >> 3] >> (i & 7)) & 1) bad(path, "stray bits in block mask");

  if (n < off + 4 * static_cast<size_t>(s.bank_count)) bad(path, "truncated bank counts");
  std::vector<u32> counts(s.bank_count);
  for (int b = 0; b < s.bank_count; ++b) counts[b] = get_u32(p + off + 4 * b);
  off += 4 * static_cast<size_t>(s.bank_count);

  // Cross-check the declared counts against the block mask.
  std::vector<u64> expect(s.bank_count, 0);
  size_t set_blocks = 0;
  for (size_t i = 0; i < m2_bits; ++i) {
    if ((s.block_mask[i >> 3] >> (i & 7)) & 1) {
      ++set_blocks;
      expect[(i % s.blocks_per_col()) % s.bank_count] += s.group;
    }
  }
  (void)set_blocks;
  for (int b = 0; b < s.bank_count; ++b)
    if (expect[b] != counts[b]) bad(path, "bank value count does not match block mask");

  s.banks.assign(s.bank_count, {});
  for (int b = 0; b < s.bank_count; ++b) {
    if (counts[b] % s.group != 0) bad(path, "bank count not a multiple of the group");
    if (n < off + 2 * static_cast<size_t>(counts[b])) bad(path, "truncated bank values");
    s.banks[b].resize(counts[b]);
    for (u32 i = 0; i < counts[b]; ++i) {
      const std::uint16_t u = static_cast<std::uint16_t>(p[off + 2 * i]) |
                              static_cast<std::uint16_t>(p[off + 2 * i + 1]) << 8;
      s.banks[b][i] = static_cast<i16>(u);
    }
    off += 2 * static_cast<size_t>(counts[b]);
  }
  if (off != n) bad(path, "trailing bytes");

  s.build_index();
  return s;
}

}  // namespace spots
