#include "spots/compress.hpp"

#include <bit>
#include <stdexcept>

namespace spots {

u64 FeatureBitmap::set_count() const {
  u64 n = 0;
  for (u8 b : bits) n += std::popcount(b);
  return n;
}

FeatureBitmap compress_tile(const Mat16& tile, int block_size) {
  if (block_size < 1) throw std::invalid_argument("compress: block size must be positive");
  if (tile.rows < 1 || tile.cols < 1) throw std::invalid_argument("compress: empty tile");

  FeatureBitmap fb;
  fb.block_size = block_size;
  fb.blocks_per_col = (tile.rows + block_size - 1) / block_size;
  fb.cols = tile.cols;
  fb.bits.assign((static_cast<size_t>(fb.blocks_per_col) * tile.cols + 7) / 8, 0);

  for (int j = 0; j < tile.cols; ++j) {
    for (int b = 0; b < fb.blocks_per_col; ++b) {
      const int r0 = b * block_size;
      const int r1 = std::min(r0 + block_size, tile.rows);
      bool any = false;
      for (int r = r0; r < r1 && !any; ++r) any = tile.at(r, j) != 0;
      if (any) {
        const size_t i = static_cast<size_t>(j) * fb.blocks_per_col + b;
        fb.bits[i >> 3] |= static_cast<u8>(1u << (i & 7));
      }
    }
  }
  return fb;
}

}  // namespace spots
