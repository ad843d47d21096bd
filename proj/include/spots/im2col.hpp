#pragma once

#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "spots/layer.hpp"
#include "spots/tensor.hpp"

namespace spots {

constexpr u64 kUnboundedCap = ~0ull;

struct Im2ColConfig {
  int pu_count = 4;
  u64 new_buf_cap = kUnboundedCap;
  u64 neighbor_buf_cap = kUnboundedCap;
  u64 reserved_buf_cap = kUnboundedCap;
  int sram_bandwidth = 4;  // elements the input controller delivers per cycle
  int ring_bandwidth = 1;  // elements per ring link per cycle

  void validate() const;
};

// Where one patch element came from.
//
//   kNew       fetched from SRAM by the input controller
//   kNeighbor  forwarded over the ring from the patch one column to the
//              left (horizontal overlap)
//   kReserved  kept in this PU's reserve buffer from the patch one output
//              row above (vertical overlap)
//   kPad       padding, generated locally at zero SRAM cost
enum class ElemSource : u8 { kNew, kNeighbor, kReserved, kPad };

// Patches are numbered p = py*outW + px.  A unit owns the half-open range
// [begin, end); split-mode GEMM gives each sub-array's feeder its own range.
struct PatchRange {
  int begin = 0;
  int end = 0;
};

struct Im2ColStats {
  u64 sram_reads = 0;
  u64 neighbor_forwards = 0;
  u64 reserved_hits = 0;
  u64 padding_zeros = 0;
  u64 elements_emitted = 0;
  u64 cycles = 0;
  u64 buffer_accesses = 0;
  u64 metadata_ops = 0;

  Im2ColStats& operator+=(const Im2ColStats& o);
};

// One round's demand on the two contended resources: SRAM delivery of new
// elements versus the busiest PU's one-element-per-cycle assembly.
struct RoundLoad {
  u64 new_elems = 0;
  u64 max_pu_elems = 0;
};

// Sum over rounds of max(ceil(new / sram_bandwidth), max_pu_elems), plus
// one ring-hop of latency per round.
u64 estimate_cycles(std::span<const RoundLoad> rounds, const Im2ColConfig& cfg);
u64 estimate_bypass_cycles(u64 elements_emitted, const Im2ColConfig& cfg);

// With stride >= both kernel dimensions patches never overlap and the
// input controller can feed the output stage directly, skipping the PUs.
bool bypass_eligible(const LayerSpec& layer);

// Source classification for every element of one patch, in canonical row
// order.  Pure in (patch, layer, cfg, range); the simulation uses exactly
// this function, so counted stats and moved data cannot drift apart.
std::vector<ElemSource> classify_sources(int patch, const LayerSpec& layer,
                                         const Im2ColConfig& cfg, PatchRange range);

// A batch of finished patch columns handed to the GEMM side.
struct PatchTile {
  int first_patch = 0;
  Mat16 cols;  // patch_rows x (<= tile_width)
};

// Streaming patch assembly for one Im2Col unit.  Values really flow
// through the modeled buffers: a neighbor element is copied out of the
// previous patch's column, a reserved element out of the stored overlap
// region, so output correctness exercises the datapath and not just the
// index arithmetic.
class Im2ColUnit {
 public:
  Im2ColUnit(const FeatureMap& x, const LayerSpec& layer, const Im2ColConfig& cfg,
             PatchRange range, int tile_width, bool bypass = false);

  std::optional<PatchTile> next_tile();
  const Im2ColStats& stats() const { return stats_; }
  bool done() const {
    return next_patch_ >= range_.end &&
           pending_head_ == static_cast<int>(pending_.size());
  }

 private:
  void process_round();
  void process_bypass_chunk();
  std::vector<i16> assemble_patch(int p);

  const FeatureMap& x_;
  LayerSpec layer_;
  Im2ColConfig cfg_;
  PatchRange range_;
  int tile_width_;
  bool bypass_;
  bool neighbor_active_ = false;
  bool reserve_active_ = false;

  int next_patch_ = 0;
  int emitted_base_ = 0;  // patch id of the next column to leave the unit
  std::vector<std::vector<i16>> pending_;
  int pending_head_ = 0;
  std::vector<i16> prev_col_;
  int prev_patch_ = -1;
  std::unordered_map<int, std::vector<i16>> reserve_store_;  // px -> overlap region
  Im2ColStats stats_;
};

struct Im2ColResult {
  Mat16 matrix;
  Im2ColStats stats;
};

// Drives a single unit over all patches and concatenates the tiles.
Im2ColResult simulate_im2col(const FeatureMap& x, const LayerSpec& layer,
                             const Im2ColConfig& cfg);
Im2ColResult simulate_bypass(const FeatureMap& x, const LayerSpec& layer,
                             const Im2ColConfig& cfg);

struct PoolResult {
  FeatureMap output;
  Im2ColStats stats;
};

// Pooling rides the same patch schedule; the patch units reduce each
// assembled window instead of emitting it.
PoolResult simulate_pool(const FeatureMap& x, const LayerSpec& layer,
                         const Im2ColConfig& cfg);

}  // namespace spots
