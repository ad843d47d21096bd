#pragma once

#include <string>
#include <vector>

#include "spots/tensor.hpp"

namespace spots {

enum class PruneNorm { kMaxAbs, kL2 };

// Group-wise pruning over G x 1 blocks: G vertically consecutive weights
// within one column of the flattened weight matrix share one keep/drop
// decision, so surviving weights stay aligned with whole-block skipping.
struct PruneConfig {
  int group = 4;
  i32 threshold = 0;          // non-negative magnitude; blocks with
                              // norm < threshold are zeroed, ties survive
  PruneNorm norm = PruneNorm::kMaxAbs;
};

Mat16 prune_groupwise(const Mat16& w, const PruneConfig& cfg);

// Bitmap block-sparse container for a pruned weight matrix.
//
//   col_mask   one bit per column; 0 means the whole column is zero.
//   block_mask one bit per G-row block, only for columns whose col_mask
//              bit is set, laid out column-major over those columns with
//              blocks top to bottom.
//   banks      surviving block values, G at a time (the ragged final block
//              is zero-padded to G); block with row index b goes to bank
//              b % bank_count, appended in the same column-major scan.
//
// Bits pack LSB-first: bit i of a stream lives in byte i/8 at position i%8.
struct BlockSparseWeights {
  int filters = 0;
  int cols = 0;
  int group = 4;
  int bank_count = 4;
  std::vector<u8> col_mask;
  std::vector<u8> block_mask;
  std::vector<std::vector<i16>> banks;

  int blocks_per_col() const { return (filters + group - 1) / group; }
  bool col_bit(int j) const { return (col_mask[j >> 3] >> (j & 7)) & 1; }
  bool block_bit(int col_rank, int block_row) const {
    const size_t i = static_cast<size_t>(col_rank) * blocks_per_col() + block_row;
    return (block_mask[i >> 3] >> (i & 7)) & 1;
  }

  int nonzero_cols() const;
  u64 stored_values() const;  // across all banks, padding included

  // Rank of column j among the non-zero columns (valid when col_bit(j)).
  int col_rank(int j) const { return rank_[j]; }

  // Fills `out` (length `filters`) with the dense values of column j.
  void gather_column(int j, i16* out) const;

  // Number of surviving blocks in column j; 0 when the column is masked.
  int col_block_count(int j) const;

  void build_index();  // called by encode/read; rebuilds rank_ and cursors

 private:
  std::vector<int> rank_;
  // For each non-zero column, per-bank start offsets of its blocks.
  std::vector<std::vector<u32>> bank_cursor_;
};

BlockSparseWeights encode_blocksparse(const Mat16& w, int group, int bank_count);
Mat16 decode_blocksparse(const BlockSparseWeights& s);

// Storage footprints in bytes.  CSR is the comparison baseline: int16
// values, 32-bit column indices, 32-bit row pointers.
u64 footprint_blocksparse(const BlockSparseWeights& s);
u64 footprint_csr(const Mat16& w);

// Container file ("SBSW" v1): 4-byte magic, version byte, 3 reserved zero
// bytes, u32 fields filters/cols/group/bank_count, col_mask bytes,
// block_mask bytes, bank_count u32 value counts, then the bank values as
// little-endian int16 in bank order.
void write_sbsw(const std::string& path, const BlockSparseWeights& s);
BlockSparseWeights read_sbsw(const std::string& path);

}  // namespace spots
