#pragma once

#include <vector>

#include "spots/tensor.hpp"

namespace spots {

// Zero-block bitmap over the patch columns leaving the Im2Col unit.  Each
// column is cut into blocks of `block_size` consecutive rows (the ragged
// tail is padded with zeros for the test only); a clear bit means the
// whole block is zero, which is what lets the GEMM input controller skip
// feature rows.  The block size is independent of the weight prune group.
struct FeatureBitmap {
  int block_size = 8;
  int blocks_per_col = 0;
  int cols = 0;
  std::vector<u8> bits;  // LSB-first, column-major

  bool bit(int col, int block) const {
    const size_t i = static_cast<size_t>(col) * blocks_per_col + block;
    return (bits[i >> 3] >> (i & 7)) & 1;
  }
  u64 set_count() const;
};

FeatureBitmap compress_tile(const Mat16& tile, int block_size);

}  // namespace spots
