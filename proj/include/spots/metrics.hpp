#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "spots/fixed_point.hpp"
#include "spots/im2col.hpp"
#include "spots/layer.hpp"

namespace spots {

// Per-access energy costs in abstract units.  Only ratios matter; the
// defaults keep DRAM two orders of magnitude above a MAC and a small SRAM
// in between, which is the regime the reuse buffers are designed for.
struct EnergyCostTable {
  double dram_read = 200;
  double sram_read = 6;
  double sram_write = 6;
  double buffer_access = 1;
  double mac_op = 1;
  double metadata_op = 1;

  void validate() const;  // all costs must be non-negative
};

struct EventCounts {
  u64 dram_reads = 0;
  u64 sram_reads = 0;
  u64 sram_writes = 0;
  u64 buffer_accesses = 0;
  u64 mac_ops = 0;
  u64 gated_macs = 0;    // billed as metadata, not MAC energy
  u64 metadata_ops = 0;

  EventCounts& operator+=(const EventCounts& o);
};

struct EnergyBreakdown {
  double dram = 0;
  double sram_read = 0;
  double sram_write = 0;
  double buffer = 0;
  double mac = 0;
  double metadata = 0;

  double total() const { return dram + sram_read + sram_write + buffer + mac + metadata; }
};

EnergyBreakdown tally(const EventCounts& ev, const EnergyCostTable& costs);

// Fractional Im2Col energy saved by the reuse buffers: 1 - E(reuse)/E(off),
// tallying only the Im2Col unit's own events.  Zero when the schedule has
// no overlap to exploit (stride >= kernel).
double compare_reuse_energy(const FeatureMap& x, const LayerSpec& layer,
                            const Im2ColConfig& cfg, const EnergyCostTable& costs);

// One report row per layer.  The CSV column order is fixed and documented
// in the README; the JSON form carries the same field names.
struct SimReport {
  std::string grid;  // sweep point tag, empty for plain runs
  int layer_index = 0;
  std::string kind;
  std::string mode;  // pu / bypass / pool / fc
  int out_c = 0, out_h = 0, out_w = 0;
  u64 im2col_cycles = 0;
  u64 gemm_cycles = 0;
  u64 layer_cycles = 0;  // max of the two, the stages run overlapped
  u64 sram_reads = 0;
  u64 neighbor_forwards = 0;
  u64 reserved_hits = 0;
  u64 padding_zeros = 0;
  u64 elements_emitted = 0;
  u64 streamed_positions = 0;
  u64 skipped_by_m1 = 0;
  u64 skipped_by_feature = 0;
  u64 mac_ops = 0;
  u64 gated_macs = 0;
  double row_occupancy = 0;
  double col_occupancy = 0;
  double mac_active_fraction = 0;
  u64 dram_reads = 0;
  u64 sram_writes = 0;
  u64 buffer_accesses = 0;
  u64 metadata_ops = 0;
  EnergyBreakdown energy;
  bool verified = false;
};

std::string report_csv_header();
std::string report_csv_row(const SimReport& r);
void write_report_csv(std::ostream& os, const std::vector<SimReport>& rows);
void write_report_json(std::ostream& os, const std::vector<SimReport>& rows);

}  // namespace spots
