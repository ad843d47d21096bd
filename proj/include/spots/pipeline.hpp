#pragma once

#include <deque>
#include <functional>
#include <string>

#include "spots/gemm.hpp"
#include "spots/im2col.hpp"
#include "spots/metrics.hpp"
#include "spots/sparse.hpp"

namespace spots {

// Everything configurable about the modeled accelerator instance.
struct HardwareConfig {
  ArrayConfig array;
  Im2ColConfig im2col;
  int feature_block = 8;  // compressor block size, independent of prune.group
  int bank_count = 4;
  PruneConfig prune;
  EnergyCostTable energy;
};

// Bounded hand-off between the Im2Col producer and the GEMM consumer.
// Capacity two tiles models the double buffer: one being filled while the
// other drains.  Single-threaded, so "overlap" is purely the bounded
// read-ahead; timing overlap is expressed as max() over stage cycles.
class TileChannel {
 public:
  TileChannel(int capacity, TileFn producer)
      : capacity_(capacity), producer_(std::move(producer)) {}

  std::optional<GemmTile> pop();
  u64 max_occupancy() const { return max_occupancy_; }

 private:
  int capacity_;
  TileFn producer_;
  std::deque<GemmTile> queue_;
  bool exhausted_ = false;
  u64 max_occupancy_ = 0;
};

struct LayerRunResult {
  FeatureMap output;
  std::string mode;  // pu / bypass / pool / fc
  Im2ColStats im2col;
  GemmStats gemm;
  EventCounts events;
  u64 layer_cycles = 0;
};

// Full conv layer: per sub-array Im2Col feed -> compressor -> double
// buffer -> GEMM, then bias/ReLU/requantization on the way out.
LayerRunResult run_conv_layer(const FeatureMap& x, const BlockSparseWeights& w,
                              const LayerSpec& layer, const HardwareConfig& hw);

LayerRunResult run_pool_layer(const FeatureMap& x, const LayerSpec& layer,
                              const HardwareConfig& hw);

LayerRunResult run_fc_layer(const FeatureMap& x, const BlockSparseWeights& w,
                            const LayerSpec& layer, const HardwareConfig& hw);

// Requantize a finished fc accumulator matrix into a (filters, 1, batch)
// feature map; applied identically to engine and oracle outputs.
FeatureMap fc_to_feature(const AccMat& acc, const LayerSpec& layer);

SimReport make_report(const LayerRunResult& run, const LayerSpec& layer, int index,
                      const EnergyCostTable& costs);

}  // namespace spots
