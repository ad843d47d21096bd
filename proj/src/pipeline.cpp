#include "spots/pipeline.hpp"

#include <memory>
#include <stdexcept>

#include "spots/reference.hpp"

namespace spots {

std::optional<GemmTile> TileChannel::pop() {
  while (!exhausted_ && static_cast<int>(queue_.size()) < capacity_) {
    auto t = producer_();
    if (!t) {
      exhausted_ = true;
      break;
    }
    queue_.push_back(std::move(*t));
    max_occupancy_ = std::max(max_occupancy_, static_cast<u64>(queue_.size()));
  }
  if (queue_.empty()) return std::nullopt;
  GemmTile t = std::move(queue_.front());
  queue_.pop_front();
  return t;
}

namespace {

// Weight-side load traffic shared by conv and fc layers: values move from
// DRAM into the SRAM banks once per layer.
void add_weight_load(EventCounts& ev, const BlockSparseWeights& w) {
  const u64 n = w.stored_values();
  ev.dram_reads += n;
  ev.sram_writes += n;
}

void add_input_load(EventCounts& ev, u64 elements) {
  ev.dram_reads += elements;
  ev.sram_writes += elements;
}

}  // namespace

LayerRunResult run_conv_layer(const FeatureMap& x, const BlockSparseWeights& w,
                              const LayerSpec& layer, const HardwareConfig& hw) {
  layer.validate();
  if (layer.kind != LayerKind::kConv)
    throw std::invalid_argument("run_conv_layer: not a conv layer");
  if (w.filters != layer.filters || w.cols != layer.patch_rows())
    throw std::invalid_argument("run_conv_layer: weights do not match the layer");

  const bool bypass = bypass_eligible(layer);
  const int patches = layer.patch_count();
  const int k = hw.array.split_factor;

  LayerRunResult res;
  res.mode = bypass ? "bypass" : "pu";

  AccMat acc(layer.filters, patches);
  u64 compress_meta = 0;
  bool first = true;

  for (int i = 0; i < k; ++i) {
    const int p0 = static_cast<int>(static_cast<i64>(i) * patches / k);
    const int p1 = static_cast<int>(static_cast<i64>(i + 1) * patches / k);
    if (p0 == p1) continue;

    auto unit = std::make_shared<Im2ColUnit>(x, layer, hw.im2col, PatchRange{p0, p1},
                                             hw.array.cols, bypass);
    TileFn producer = [unit, &hw, &compress_meta]() -> std::optional<GemmTile> {
      auto t = unit->next_tile();
      if (!t) return std::nullopt;
      GemmTile g;
      g.first_col = t->first_patch;
      g.cols = std::move(t->cols);
      g.bitmap = compress_tile(g.cols, hw.feature_block);
      compress_meta += static_cast<u64>(g.bitmap.blocks_per_col) * g.bitmap.cols;
      return g;
    };
    auto channel = std::make_shared<TileChannel>(2, std::move(producer));

    GemmRun part = simulate_gemm(w, hw.array, hw.array.sub_rows(), p0, p1 - p0,
                                 [channel]() { return channel->pop(); });

    for (int f = 0; f < layer.filters; ++f)
      for (int p = p0; p < p1; ++p) acc.at(f, p) = part.output.at(f, p - p0);

    // Sub-arrays and their feeder units run side by side: counts add up,
    // elapsed cycles are the slowest machine's.
    if (first) {
      res.im2col = unit->stats();
      res.gemm = part.stats;
      first = false;
    } else {
      const Im2ColStats& s = unit->stats();
      const u64 cyc = std::max(res.im2col.cycles, s.cycles);
      res.im2col += s;
      res.im2col.cycles = cyc;
      res.gemm.merge_parallel(part.stats);
    }
  }
  acc.overflow24_events = res.gemm.overflow24_events;

  const Placement pl = configure(hw.array, layer.filters);
  res.gemm.row_occupancy = pl.row_occupancy;
  res.gemm.col_occupancy =
      res.gemm.tile_passes == 0
          ? 0.0
          : static_cast<double>(res.gemm.occupied_col_slots) /
                (static_cast<double>(res.gemm.tile_passes) * hw.array.cols);
  const double active_pes = static_cast<double>(pl.active_rows) * hw.array.cols *
                            hw.array.split_factor;
  res.gemm.mac_active_fraction =
      res.gemm.cycles == 0 ? 0.0
                           : static_cast<double>(res.gemm.mac_ops) /
                                 (active_pes * static_cast<double>(res.gemm.cycles));

  res.output = reshape_output(acc, layer);

  add_input_load(res.events, x.size());
  add_weight_load(res.events, w);
  res.events.sram_reads += res.im2col.sram_reads + res.gemm.weight_sram_reads;
  res.events.sram_writes += res.gemm.output_writes;
  res.events.buffer_accesses += res.im2col.buffer_accesses + res.gemm.feature_buffer_reads;
  res.events.mac_ops += res.gemm.mac_ops;
  res.events.gated_macs += res.gemm.gated_macs;
  res.events.metadata_ops += res.im2col.metadata_ops + res.gemm.metadata_ops + compress_meta;

  res.layer_cycles = std::max(res.im2col.cycles, res.gemm.cycles);
  return res;
}

LayerRunResult run_pool_layer(const FeatureMap& x, const LayerSpec& layer,
                              const HardwareConfig& hw) {
  layer.validate();
  if (layer.kind != LayerKind::kMaxPool && layer.kind != LayerKind::kAvgPool)
    throw std::invalid_argument("run_pool_layer: not a pooling layer");

  PoolResult pr = simulate_pool(x, layer, hw.im2col);

  LayerRunResult res;
  res.mode = "pool";
  res.output = std::move(pr.output);
  res.im2col = pr.stats;
  res.layer_cycles = pr.stats.cycles;

  add_input_load(res.events, x.size());
  res.events.sram_reads += pr.stats.sram_reads;
  res.events.sram_writes += res.output.size();
  res.events.buffer_accesses += pr.stats.buffer_accesses;
  res.events.metadata_ops += pr.stats.metadata_ops;
  return res;
}

FeatureMap fc_to_feature(const AccMat& acc, const LayerSpec& layer) {
  FeatureMap out(acc.rows, 1, acc.cols);
  for (int f = 0; f < acc.rows; ++f)
    for (int b = 0; b < acc.cols; ++b)
      out.at(f, 0, b) = requantize(acc.at(f, b), layer.requant_shift);
  return out;
}

LayerRunResult run_fc_layer(const FeatureMap& x, const BlockSparseWeights& w,
                            const LayerSpec& layer, const HardwareConfig& hw) {
  layer.validate();
  if (layer.kind != LayerKind::kFullyConnected)
    throw std::invalid_argument("run_fc_layer: not an fc layer");
  if (w.filters != layer.filters)
    throw std::invalid_argument("run_fc_layer: weights do not match the layer");
  if (static_cast<int>(x.size()) != w.cols * layer.batch)
    throw std::invalid_argument("run_fc_layer: input size does not match the weights");

  // The flattened activations form an (inputs x batch) matrix.
  Mat16 input(w.cols, layer.batch);
  for (int b = 0; b < layer.batch; ++b)
    for (int r = 0; r < w.cols; ++r)
      input.at(r, b) = x.values[static_cast<size_t>(b) * w.cols + r];

  GemmRun run = simulate_fc(w, hw.array, input, layer.bias, layer.relu, hw.feature_block);

  LayerRunResult res;
  res.mode = "fc";
  res.gemm = run.stats;
  res.output = fc_to_feature(run.output, layer);

  // Activation delivery plays the Im2Col role here: a straight stream.
  res.im2col.elements_emitted = input.values.size();
  res.im2col.cycles = estimate_bypass_cycles(res.im2col.elements_emitted, hw.im2col);
  res.im2col.sram_reads = input.values.size();
  res.im2col.buffer_accesses = input.values.size();
  res.im2col.metadata_ops = input.values.size();

  add_input_load(res.events, input.values.size());
  add_weight_load(res.events, w);
  res.events.sram_reads += res.im2col.sram_reads + run.stats.weight_sram_reads;
  res.events.sram_writes += run.stats.output_writes;
  res.events.buffer_accesses += res.im2col.buffer_accesses + run.stats.feature_buffer_reads;
  res.events.mac_ops += run.stats.mac_ops;
  res.events.gated_macs += run.stats.gated_macs;
  res.events.metadata_ops += res.im2col.metadata_ops + run.stats.metadata_ops;

  res.layer_cycles = std::max(res.im2col.cycles, res.gemm.cycles);
  return res;
}

SimReport make_report(const LayerRunResult& run, const LayerSpec& layer, int index,
                      const EnergyCostTable& costs) {
  SimReport r;
  r.layer_index = index;
  r.kind = to_string(layer.kind);
  r.mode = run.mode;
  r.out_c = run.output.channels;
  r.out_h = run.output.height;
  r.out_w = run.output.width;
  r.im2col_cycles = run.im2col.cycles;
  r.gemm_cycles = run.gemm.cycles;
  r.layer_cycles = run.layer_cycles;
  r.sram_reads = run.events.sram_reads;
  r.neighbor_forwards = run.im2col.neighbor_forwards;
  r.reserved_hits = run.im2col.reserved_hits;
  r.padding_zeros = run.im2col.padding_zeros;
  r.elements_emitted = run.im2col.elements_emitted;
  r.streamed_positions = run.gemm.streamed_positions;
  r.skipped_by_m1 = run.gemm.skipped_by_m1;
  r.skipped_by_feature = run.gemm.skipped_by_feature;
  r.mac_ops = run.gemm.mac_ops;
  r.gated_macs = run.gemm.gated_macs;
  r.row_occupancy = run.gemm.row_occupancy;
  r.col_occupancy = run.gemm.col_occupancy;
  r.mac_active_fraction = run.gemm.mac_active_fraction;
  r.dram_reads = run.events.dram_reads;
  r.sram_writes = run.events.sram_writes;
  r.buffer_accesses = run.events.buffer_accesses;
  r.metadata_ops = run.events.metadata_ops;
  r.energy = tally(run.events, costs);
  return r;
}

}  // namespace spots
