#include "spots/gemm.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace spots {

void ArrayConfig::validate() const {
  if (rows < 1 || cols < 1) throw std::invalid_argument("gemm: array dimensions must be positive");
  if (regs_per_pe < 1) throw std::invalid_argument("gemm: need at least one weight register per PE");
  if (split_factor < 1 || rows % split_factor != 0)
    throw std::invalid_argument("gemm: split factor must divide the row count");
  if (pass_limit < 1) throw std::invalid_argument("gemm: pass limit must be positive");
}

Placement configure(const ArrayConfig& cfg, int filters) {
  cfg.validate();
  if (filters < 1) throw std::invalid_argument("gemm: filter count must be positive");

  Placement pl;
  pl.sub_rows = cfg.sub_rows();
  const int per_pass = pl.sub_rows * cfg.regs_per_pe;
  pl.passes = (filters + per_pass - 1) / per_pass;
  if (pl.passes > cfg.pass_limit)
    throw std::invalid_argument("gemm: filter count exceeds the pass budget");
  for (int p = 0; p < pl.passes; ++p) {
    const int f = std::min(per_pass, filters - p * per_pass);
    pl.pass_filters.push_back(f);
    pl.pass_regs.push_back((f + pl.sub_rows - 1) / pl.sub_rows);
  }
  pl.active_rows = std::min(filters, pl.sub_rows);
  pl.row_occupancy = static_cast<double>(pl.active_rows) / pl.sub_rows;
  return pl;
}

void GemmStats::merge_parallel(const GemmStats& o) {
  cycles = std::max(cycles, o.cycles);
  streamed_positions += o.streamed_positions;
  skipped_by_m1 += o.skipped_by_m1;
  skipped_by_feature += o.skipped_by_feature;
  mac_ops += o.mac_ops;
  gated_macs += o.gated_macs;
  weight_sram_reads += o.weight_sram_reads;
  feature_buffer_reads += o.feature_buffer_reads;
  output_writes += o.output_writes;
  metadata_ops += o.metadata_ops;
  overflow24_events += o.overflow24_events;
  tile_passes += o.tile_passes;
  occupied_col_slots += o.occupied_col_slots;
  // occupancies and mac_active_fraction are recomputed by the caller
}

std::vector<int> schedule_positions(const BlockSparseWeights& w, const FeatureBitmap& fb) {
  std::vector<int> out;
  for (int j = 0; j < w.cols; ++j) {
    if (!w.col_bit(j)) continue;
    const int block = j / fb.block_size;
    bool live = false;
    for (int t = 0; t < fb.cols && !live; ++t) live = fb.bit(t, block);
    if (live) out.push_back(j);
  }
  return out;
}

GemmRun simulate_gemm(const BlockSparseWeights& w, const ArrayConfig& cfg, int sub_rows,
                      int col_base, int col_count, const TileFn& next_tile) {
  cfg.validate();
  if (sub_rows < 1 || cfg.rows % sub_rows != 0)
    throw std::invalid_argument("gemm: sub-array rows must divide the array");
  if (col_count < 1) throw std::invalid_argument("gemm: empty output range");

  const int filters = w.filters;
  const int shared = w.cols;
  ArrayConfig sub_cfg = cfg;
  sub_cfg.split_factor = cfg.rows / sub_rows;
  const Placement pl = configure(sub_cfg, filters);

  GemmRun run;
  run.output = AccMat(filters, col_count);
  std::vector<i64> acc64(run.output.values.size(), 0);
  std::vector<i16> wcol(static_cast<size_t>(filters));

  while (auto tile = next_tile()) {
    const int tw = tile->cols.cols;
    if (tile->cols.rows != shared)
      throw std::invalid_argument("gemm: tile height does not match the weight matrix");
    if (tile->first_col < col_base || tile->first_col + tw > col_base + col_count)
      throw std::invalid_argument("gemm: tile outside the array's output range");
    const int out0 = tile->first_col - col_base;

    const std::vector<int> positions = schedule_positions(w, tile->bitmap);

    // Bookkeeping for the skip taxonomy: a position missing from the
    // schedule is charged to M1 when the weight column died, otherwise to
    // the feature bitmap.
    u64 m1_dead = 0;
    for (int j = 0; j < shared; ++j) m1_dead += !w.col_bit(j);

    for (int pass = 0; pass < pl.passes; ++pass) {
      const int f0 = pass * pl.sub_rows * cfg.regs_per_pe;
      const int fn = pl.pass_filters[pass];
      const int r = pl.pass_regs[pass];

      for (int j : positions) {
        w.gather_column(j, wcol.data());
        run.stats.weight_sram_reads += static_cast<u64>(w.col_block_count(j)) * w.group;
        run.stats.feature_buffer_reads += static_cast<u64>(tw);
        for (int fi = f0; fi < f0 + fn; ++fi) {
          const i32 wv = wcol[fi];
          for (int t = 0; t < tw; ++t) {
            const i32 mv = tile->cols.at(j, t);
            if (wv != 0 && mv != 0) {
              i64& a = acc64[run.output.index(fi, out0 + t)];
              a += static_cast<i64>(wv) * mv;
              if (cfg.track_overflow24 && outside_acc24(a)) ++run.stats.overflow24_events;
              ++run.stats.mac_ops;
            } else {
              ++run.stats.gated_macs;  // slot elapses, no MAC energy
            }
          }
        }
      }

      const int active = std::min(fn, pl.sub_rows);
      run.stats.cycles += static_cast<u64>(positions.size()) * r + active + cfg.cols;
      run.stats.streamed_positions += positions.size();
      run.stats.skipped_by_m1 += m1_dead;
      run.stats.skipped_by_feature += shared - positions.size() - m1_dead;
      run.stats.metadata_ops += static_cast<u64>(shared);  // one skip decision per position
      ++run.stats.tile_passes;
      run.stats.occupied_col_slots += static_cast<u64>(tw);
    }
  }

  for (size_t i = 0; i < acc64.size(); ++i) run.output.values[i] = wrap32(acc64[i]);
  run.stats.output_writes += acc64.size();
  run.output.overflow24_events = run.stats.overflow24_events;

  run.stats.row_occupancy = pl.row_occupancy;
  run.stats.col_occupancy =
      run.stats.tile_passes == 0
          ? 0.0
          : static_cast<double>(run.stats.occupied_col_slots) /
                (static_cast<double>(run.stats.tile_passes) * cfg.cols);
  const double active_pes = static_cast<double>(pl.active_rows) * cfg.cols;
  run.stats.mac_active_fraction =
      run.stats.cycles == 0
          ? 0.0
          : static_cast<double>(run.stats.mac_ops) / (active_pes * run.stats.cycles);
  return run;
}

namespace {

TileFn matrix_tiles(const Mat16& features, int tile_width, int feature_block,
                    int col_base = 0) {
  auto next = std::make_shared<int>(0);
  auto mat = std::make_shared<Mat16>(features);
  return [next, mat, tile_width, feature_block, col_base]() -> std::optional<GemmTile> {
    if (*next >= mat->cols) return std::nullopt;
    const int w = std::min(tile_width, mat->cols - *next);
    GemmTile t;
    t.first_col = col_base + *next;
    t.cols = Mat16(mat->rows, w);
    for (int j = 0; j < w; ++j)
      for (int r = 0; r < mat->rows; ++r) t.cols.at(r, j) = mat->at(r, *next + j);
    t.bitmap = compress_tile(t.cols, feature_block);
    *next += w;
    return t;
  };
}

}  // namespace

GemmRun simulate_gemm_matrix(const BlockSparseWeights& w, const ArrayConfig& cfg,
                             const Mat16& features, int feature_block) {
  if (features.rows != w.cols)
    throw std::invalid_argument("gemm: feature matrix height does not match the weights");
  return simulate_gemm(w, cfg, cfg.rows, 0, features.cols,
                       matrix_tiles(features, cfg.cols, feature_block));
}

GemmRun simulate_fc(const BlockSparseWeights& w, const ArrayConfig& cfg,
                    const Mat16& input, const std::vector<i16>& bias, bool relu,
                    int feature_block) {
  cfg.validate();
  if (input.rows != w.cols)
    throw std::invalid_argument("fc: input height does not match the weight matrix");
  if (!bias.empty() && static_cast<int>(bias.size()) != w.filters)
    throw std::invalid_argument("fc: bias length must equal the output count");

  const int batch = input.cols;
  const int k = cfg.split_factor;

  GemmRun total;
  total.output = AccMat(w.filters, batch);
  bool first = true;
  for (int i = 0; i < k; ++i) {
    const int c0 = static_cast<int>(static_cast<i64>(i) * batch / k);
    const int c1 = static_cast<int>(static_cast<i64>(i + 1) * batch / k);
    if (c0 == c1) continue;  // nothing for this sub-array

    Mat16 slice(input.rows, c1 - c0);
    for (int j = c0; j < c1; ++j)
      for (int r = 0; r < input.rows; ++r) slice.at(r, j - c0) = input.at(r, j);

    GemmRun part = simulate_gemm(w, cfg, cfg.sub_rows(), c0, c1 - c0,
                                 matrix_tiles(slice, cfg.cols, feature_block, c0));
    for (int fi = 0; fi < w.filters; ++fi)
      for (int j = c0; j < c1; ++j)
        total.output.at(fi, j) = part.output.at(fi, j - c0);
    if (first) {
      total.stats = part.stats;
      first = false;
    } else {
      total.stats.merge_parallel(part.stats);
    }
  }

  for (int fi = 0; fi < w.filters; ++fi) {
    for (int j = 0; j < batch; ++j) {
      i64 acc = total.output.at(fi, j);
      if (!bias.empty()) acc += bias[fi];
      if (relu) acc = std::max<i64>(acc, 0);
      total.output.at(fi, j) = wrap32(acc);
    }
  }

  const Placement pl = configure(cfg, w.filters);
  total.stats.row_occupancy = pl.row_occupancy;
  total.stats.col_occupancy =
      total.stats.tile_passes == 0
          ? 0.0
          : static_cast<double>(total.stats.occupied_col_slots) /
                (static_cast<double>(total.stats.tile_passes) * cfg.cols);
  const double active_pes = static_cast<double>(pl.active_rows) * cfg.cols;
  total.stats.mac_active_fraction =
      total.stats.cycles == 0
          ? 0.0
          : static_cast<double>(total.stats.mac_ops) / (active_pes * total.stats.cycles);
  return total;
}

}  // namespace spots
