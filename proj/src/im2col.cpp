#include "spots/im2col.hpp"

#include <algorithm>
#include <stdexcept>

namespace spots {

void Im2ColConfig::validate() const {
  if (pu_count < 1) throw std::invalid_argument("im2col: need at least one patch unit");
  if (sram_bandwidth < 1) throw std::invalid_argument("im2col: sram bandwidth must be positive");
  if (ring_bandwidth < 1) throw std::invalid_argument("im2col: ring bandwidth must be positive");
}

Im2ColStats& Im2ColStats::operator+=(const Im2ColStats& o) {
  sram_reads += o.sram_reads;
  neighbor_forwards += o.neighbor_forwards;
  reserved_hits += o.reserved_hits;
  padding_zeros += o.padding_zeros;
  elements_emitted += o.elements_emitted;
  cycles += o.cycles;
  buffer_accesses += o.buffer_accesses;
  metadata_ops += o.metadata_ops;
  return *this;
}

u64 estimate_cycles(std::span<const RoundLoad> rounds, const Im2ColConfig& cfg) {
  cfg.validate();
  u64 total = 0;
  for (const RoundLoad& r : rounds) {
    const u64 fetch = (r.new_elems + cfg.sram_bandwidth - 1) / cfg.sram_bandwidth;
    total += std::max(fetch, r.max_pu_elems) + 1;  // +1 ring hop per round
  }
  return total;
}

u64 estimate_bypass_cycles(u64 elements_emitted, const Im2ColConfig& cfg) {
  cfg.validate();
  return (elements_emitted + cfg.sram_bandwidth - 1) / cfg.sram_bandwidth;
}

bool bypass_eligible(const LayerSpec& layer) {
  return layer.stride >= layer.kernel_h && layer.stride >= layer.kernel_w;
}

namespace {

// Per-patch all-or-nothing capacity rule: a reuse buffer either holds the
// whole overlap region for a patch or the region is refetched outright.
bool neighbor_enabled(const LayerSpec& l, const Im2ColConfig& cfg) {
  if (l.kernel_w <= l.stride) return false;
  const u64 region = static_cast<u64>(l.kernel_w - l.stride) * l.kernel_h * l.channels;
  return region <= cfg.neighbor_buf_cap;
}

bool reserve_enabled(const LayerSpec& l, const Im2ColConfig& cfg) {
  if (l.kernel_h <= l.stride) return false;
  const u64 region = static_cast<u64>(l.kernel_h - l.stride) * l.kernel_w * l.channels;
  return region <= cfg.reserved_buf_cap;
}

}  // namespace

std::vector<ElemSource> classify_sources(int patch, const LayerSpec& layer,
                                         const Im2ColConfig& cfg, PatchRange range) {
  layer.validate();
  cfg.validate();
  if (patch < range.begin || patch >= range.end)
    throw std::invalid_argument("classify_sources: patch outside the unit's range");

  const int out_w = layer.out_w();
  const int py = patch / out_w;
  const int px = patch % out_w;
  const bool nb = neighbor_enabled(layer, cfg) && px >= 1 && patch - 1 >= range.begin;
  const bool rs = reserve_enabled(layer, cfg) && py >= 1 && patch - out_w >= range.begin;
  const int nb_cols = layer.kernel_w - layer.stride;  // leftmost columns overlap left patch
  const int rs_rows = layer.kernel_h - layer.stride;  // topmost rows overlap patch above

  std::vector<ElemSource> src(static_cast<size_t>(layer.patch_rows()));
  size_t i = 0;
  for (int c = 0; c < layer.channels; ++c) {
    for (int r = 0; r < layer.kernel_h; ++r) {
      for (int s = 0; s < layer.kernel_w; ++s, ++i) {
        const int y = py * layer.stride - layer.pad + r;
        const int x = px * layer.stride - layer.pad + s;
        const bool in = y >= 0 && y < layer.height && x >= 0 && x < layer.width;
        if (nb && s < nb_cols) {
          // The left patch assembled this element (possibly as padding);
          // the ring hands it over either way.
          src[i] = ElemSource::kNeighbor;
        } else if (rs && in && r < rs_rows) {
          src[i] = ElemSource::kReserved;
        } else if (!in) {
          src[i] = ElemSource::kPad;
        } else {
          src[i] = ElemSource::kNew;
        }
      }
    }
  }
  return src;
}

Im2ColUnit::Im2ColUnit(const FeatureMap& x, const LayerSpec& layer, const Im2ColConfig& cfg,
                       PatchRange range, int tile_width, bool bypass)
    : x_(x), layer_(layer), cfg_(cfg), range_(range), tile_width_(tile_width),
      bypass_(bypass) {
  layer_.validate();
  cfg_.validate();
  if (x.channels != layer.channels || x.height != layer.height || x.width != layer.width)
    throw std::invalid_argument("im2col: input tensor does not match the layer");
  if (range.begin < 0 || range.end > layer.patch_count() || range.begin >= range.end)
    throw std::invalid_argument("im2col: bad patch range");
  if (tile_width < 1) throw std::invalid_argument("im2col: tile width must be positive");
  if (bypass && !bypass_eligible(layer))
    throw std::invalid_argument("im2col: bypass needs stride >= kernel in both directions");
  neighbor_active_ = neighbor_enabled(layer_, cfg_);
  reserve_active_ = reserve_enabled(layer_, cfg_);
  next_patch_ = range.begin;
  emitted_base_ = range.begin;
}

std::vector<i16> Im2ColUnit::assemble_patch(int p) {
  const int out_w = layer_.out_w();
  const int py = p / out_w;
  const int px = p % out_w;
  const int rs_rows = layer_.kernel_h - layer_.stride;
  const std::vector<ElemSource> src = classify_sources(p, layer_, cfg_, range_);

  std::vector<i16> region;
  if (reserve_active_ && py >= 1) {
    auto it = reserve_store_.find(px);
    if (it != reserve_store_.end()) {
      region = std::move(it->second);
      reserve_store_.erase(it);
    }
  }

  std::vector<i16> col(static_cast<size_t>(layer_.patch_rows()));
  size_t i = 0;
  for (int c = 0; c < layer_.channels; ++c) {
    for (int r = 0; r < layer_.kernel_h; ++r) {
      for (int s = 0; s < layer_.kernel_w; ++s, ++i) {
        switch (src[i]) {
          case ElemSource::kNew: {
            const int y = py * layer_.stride - layer_.pad + r;
            const int x = px * layer_.stride - layer_.pad + s;
            col[i] = x_.at(c, y, x);
            ++stats_.sram_reads;
            stats_.buffer_accesses += 1;  // write into the new buffer
            break;
          }
          case ElemSource::kNeighbor:
            // Same element sat at (r, s + stride) of the patch one column
            // to the left, whose buffer the ring still holds.
            col[i] = prev_col_[(static_cast<size_t>(c) * layer_.kernel_h + r) *
                                   layer_.kernel_w + s + layer_.stride];
            ++stats_.neighbor_forwards;
            stats_.buffer_accesses += 2;  // ring transfer + neighbor-buffer write
            break;
          case ElemSource::kReserved:
            col[i] = region[(static_cast<size_t>(c) * rs_rows + r) * layer_.kernel_w + s];
            ++stats_.reserved_hits;
            stats_.buffer_accesses += 2;  // reserve write (earlier) + read now
            break;
          case ElemSource::kPad:
            col[i] = 0;
            ++stats_.padding_zeros;
            break;
        }
        ++stats_.metadata_ops;  // coordinate bookkeeping for every element
        ++stats_.buffer_accesses;  // hand-off to the output controller
        ++stats_.elements_emitted;
      }
    }
  }

  // Keep the bottom rows for the patch one output row below, if this unit
  // will assemble it.
  if (reserve_active_ && rs_rows > 0 && p + out_w < range_.end) {
    std::vector<i16> keep(static_cast<size_t>(rs_rows) * layer_.kernel_w * layer_.channels);
    size_t k = 0;
    for (int c = 0; c < layer_.channels; ++c)
      for (int rr = 0; rr < rs_rows; ++rr)
        for (int s = 0; s < layer_.kernel_w; ++s, ++k)
          keep[k] = col[(static_cast<size_t>(c) * layer_.kernel_h + rr + layer_.stride) *
                            layer_.kernel_w + s];
    reserve_store_[px] = std::move(keep);
  }

  prev_col_ = col;
  prev_patch_ = p;
  return col;
}

void Im2ColUnit::process_round() {
  // A round is one row of patches across the PU ring: all live patches
  // share py and px/pu_count.
  const int out_w = layer_.out_w();
  const int py = next_patch_ / out_w;
  const int group = (next_patch_ % out_w) / cfg_.pu_count;

  u64 new_in_round = 0;
  u64 busiest_pu = 0;
  while (next_patch_ < range_.end) {
    const int p = next_patch_;
    if (p / out_w != py || (p % out_w) / cfg_.pu_count != group) break;
    const u64 before = stats_.sram_reads;
    pending_.push_back(assemble_patch(p));
    new_in_round += stats_.sram_reads - before;
    busiest_pu = static_cast<u64>(layer_.patch_rows());  // one element per cycle
    ++next_patch_;
  }
  const RoundLoad load{new_in_round, busiest_pu};
  stats_.cycles += estimate_cycles(std::span<const RoundLoad>(&load, 1), cfg_);
}

void Im2ColUnit::process_bypass_chunk() {
  const int out_w = layer_.out_w();
  const int p = next_patch_++;
  const int py = p / out_w;
  const int px = p % out_w;

  std::vector<i16> col(static_cast<size_t>(layer_.patch_rows()));
  size_t i = 0;
  for (int c = 0; c < layer_.channels; ++c) {
    for (int r = 0; r < layer_.kernel_h; ++r) {
      for (int s = 0; s < layer_.kernel_w; ++s, ++i) {
        const int y = py * layer_.stride - layer_.pad + r;
        const int x = px * layer_.stride - layer_.pad + s;
        const bool in = y >= 0 && y < layer_.height && x >= 0 && x < layer_.width;
        if (in) {
          col[i] = x_.at(c, y, x);
          ++stats_.sram_reads;
        } else {
          col[i] = 0;
          ++stats_.padding_zeros;
        }
        ++stats_.metadata_ops;
        ++stats_.buffer_accesses;  // staging at the output controller only
        ++stats_.elements_emitted;
      }
    }
  }
  pending_.push_back(std::move(col));
  stats_.cycles = estimate_bypass_cycles(stats_.elements_emitted, cfg_);
}

std::optional<PatchTile> Im2ColUnit::next_tile() {
  while (static_cast<int>(pending_.size()) - pending_head_ < tile_width_ &&
         next_patch_ < range_.end) {
    if (bypass_)
      process_bypass_chunk();
    else
      process_round();
  }
  const int avail = static_cast<int>(pending_.size()) - pending_head_;
  if (avail == 0) return std::nullopt;

  const int w = std::min(avail, tile_width_);
  PatchTile tile;
  tile.first_patch = emitted_base_;
  tile.cols = Mat16(layer_.patch_rows(), w);
  for (int j = 0; j < w; ++j) {
    const std::vector<i16>& col = pending_[pending_head_ + j];
    for (int r = 0; r < tile.cols.rows; ++r) tile.cols.at(r, j) = col[r];
  }
  pending_head_ += w;
  emitted_base_ += w;
  if (pending_head_ == static_cast<int>(pending_.size())) {
    pending_.clear();
    pending_head_ = 0;
  }
  return tile;
}

namespace {

Im2ColResult drain_unit(Im2ColUnit& unit, const LayerSpec& layer, PatchRange range) {
  Im2ColResult res;
  res.matrix = Mat16(layer.patch_rows(), range.end - range.begin);
  int col = 0;
  while (auto tile = unit.next_tile()) {
    for (int j = 0; j < tile->cols.cols; ++j, ++col)
      for (int r = 0; r < res.matrix.rows; ++r)
        res.matrix.at(r, col) = tile->cols.at(r, j);
  }
  res.stats = unit.stats();
  return res;
}

}  // namespace

Im2ColResult simulate_im2col(const FeatureMap& x, const LayerSpec& layer,
                             const Im2ColConfig& cfg) {
  PatchRange range{0, layer.patch_count()};
  Im2ColUnit unit(x, layer, cfg, range, cfg.pu_count);
  return drain_unit(unit, layer, range);
}

Im2ColResult simulate_bypass(const FeatureMap& x, const LayerSpec& layer,
                             const Im2ColConfig& cfg) {
  PatchRange range{0, layer.patch_count()};
  Im2ColUnit unit(x, layer, cfg, range, cfg.pu_count, /*bypass=*/true);
  return drain_unit(unit, layer, range);
}

PoolResult simulate_pool(const FeatureMap& x, const LayerSpec& layer,
                         const Im2ColConfig& cfg) {
  if (layer.kind != LayerKind::kMaxPool && layer.kind != LayerKind::kAvgPool)
    throw std::invalid_argument("simulate_pool: not a pooling layer");

  // Pool windows follow the conv patch schedule one for one; only the
  // reduction at the PU output differs.
  Im2ColResult cols = bypass_eligible(layer) ? simulate_bypass(x, layer, cfg)
                                             : simulate_im2col(x, layer, cfg);
  const bool is_max = layer.kind == LayerKind::kMaxPool;
  const int window = layer.kernel_h * layer.kernel_w;
  const int out_w = layer.out_w();

  PoolResult res;
  res.stats = cols.stats;
  res.output = FeatureMap(layer.channels, layer.out_h(), out_w);
  for (int p = 0; p < cols.matrix.cols; ++p) {
    for (int c = 0; c < layer.channels; ++c) {
      i32 best = kInt16Min - 1;
      i32 sum = 0;
      for (int k = 0; k < window; ++k) {
        const i32 v = cols.matrix.at(c * window + k, p);
        best = std::max(best, v);
        sum += v;
      }
      i32 v = is_max ? best : sum / window;
      if (layer.relu) v = std::max(v, 0);
      res.output.at(c, p / out_w, p % out_w) = saturate16(v);
    }
  }
  return res;
}

}  // namespace spots
