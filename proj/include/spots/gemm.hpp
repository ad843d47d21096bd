#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "spots/compress.hpp"
#include "spots/sparse.hpp"
#include "spots/tensor.hpp"

namespace spots {

// Output-stationary systolic array.  `rows` x `cols` PEs in tall mode;
// split mode carves the rows into `split_factor` equal sub-arrays that all
// hold the same (broadcast) weights and cover disjoint output-column
// ranges.  Each PE owns `regs_per_pe` weight registers, so one pass can
// hold up to rows * regs_per_pe filter rows; larger filter counts take
// multiple passes up to `pass_limit`.
struct ArrayConfig {
  int rows = 128;
  int cols = 4;
  int regs_per_pe = 4;
  int split_factor = 1;
  int pass_limit = 16;
  bool track_overflow24 = false;

  int sub_rows() const { return rows / split_factor; }
  void validate() const;
};

struct Placement {
  int sub_rows = 0;
  int passes = 0;
  std::vector<int> pass_filters;  // filters mapped in each pass
  std::vector<int> pass_regs;     // filter rows per PE row in each pass
  int active_rows = 0;            // rows holding at least one filter
  double row_occupancy = 0;       // active_rows / sub_rows
};

// Filter row f lands on PE row (f % sub_rows), register slot (f / sub_rows),
// per pass.  Throws when the filter count exceeds the pass budget.
Placement configure(const ArrayConfig& cfg, int filters);

struct GemmStats {
  u64 cycles = 0;
  u64 streamed_positions = 0;
  u64 skipped_by_m1 = 0;
  u64 skipped_by_feature = 0;
  u64 mac_ops = 0;
  u64 gated_macs = 0;
  double row_occupancy = 0;
  double col_occupancy = 0;
  double mac_active_fraction = 0;
  u64 weight_sram_reads = 0;    // block values fetched from the weight banks
  u64 feature_buffer_reads = 0; // tile values pulled from the double buffer
  u64 output_writes = 0;        // one per finished output element
  u64 metadata_ops = 0;         // bitmap tests and position arithmetic
  u64 overflow24_events = 0;
  u64 tile_passes = 0;
  u64 occupied_col_slots = 0;   // sum of tile widths over tile passes

  void merge_parallel(const GemmStats& o);  // sub-arrays running side by side
};

// Shared-dimension positions worth streaming for one tile: the weight
// column must survive in M1 and at least one of the tile's columns must
// have a live feature block there.  Ascending order.
std::vector<int> schedule_positions(const BlockSparseWeights& w, const FeatureBitmap& fb);

// One tile handed over by the Im2Col side.
struct GemmTile {
  int first_col = 0;
  Mat16 cols;
  FeatureBitmap bitmap;
};

using TileFn = std::function<std::optional<GemmTile>()>;

struct GemmRun {
  AccMat output;  // filters x col_count
  GemmStats stats;
};

// Runs one (sub-)array of `sub_rows` PE rows over output columns
// [col_base, col_base + col_count), pulling tiles until the stream ends.
// Zero operands still occupy their cycle slot but count as gated MACs.
GemmRun simulate_gemm(const BlockSparseWeights& w, const ArrayConfig& cfg, int sub_rows,
                      int col_base, int col_count, const TileFn& next_tile);

// Convenience wrapper: slice a dense feature matrix into cfg.cols-wide
// tiles, compress each with `feature_block`, and run a tall array.
GemmRun simulate_gemm_matrix(const BlockSparseWeights& w, const ArrayConfig& cfg,
                             const Mat16& features, int feature_block);

// Fully connected layer on the same machinery: the batch columns take the
// place of patch columns.  Split mode divides the batch across sub-arrays.
GemmRun simulate_fc(const BlockSparseWeights& w, const ArrayConfig& cfg,
                    const Mat16& input, const std::vector<i16>& bias, bool relu,
                    int feature_block);

}  // namespace spots
