#include "spots/metrics.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace spots {

void EnergyCostTable::validate() const {
  const double costs[] = {dram_read, sram_read, sram_write, buffer_access, mac_op, metadata_op};
  for (double c : costs)
    if (c < 0) throw std::invalid_argument("energy: costs must be non-negative");
}

EventCounts& EventCounts::operator+=(const EventCounts& o) {
  dram_reads += o.dram_reads;
  sram_reads += o.sram_reads;
  sram_writes += o.sram_writes;
  buffer_accesses += o.buffer_accesses;
  mac_ops += o.mac_ops;
  gated_macs += o.gated_macs;
  metadata_ops += o.metadata_ops;
  return *this;
}

EnergyBreakdown tally(const EventCounts& ev, const EnergyCostTable& costs) {
  costs.validate();
  EnergyBreakdown e;
  e.dram = static_cast<double>(ev.dram_reads) * costs.dram_read;
  e.sram_read = static_cast<double>(ev.sram_reads) * costs.sram_read;
  e.sram_write = static_cast<double>(ev.sram_writes) * costs.sram_write;
  e.buffer = static_cast<double>(ev.buffer_accesses) * costs.buffer_access;
  e.mac = static_cast<double>(ev.mac_ops) * costs.mac_op;
  // A gated multiply burns no MAC energy, only the bookkeeping that
  // recognized the zero.
  e.metadata = static_cast<double>(ev.metadata_ops + ev.gated_macs) * costs.metadata_op;
  return e;
}

namespace {

double im2col_energy(const Im2ColStats& s, const EnergyCostTable& costs) {
  EventCounts ev;
  ev.sram_reads = s.sram_reads;
  ev.buffer_accesses = s.buffer_accesses;
  ev.metadata_ops = s.metadata_ops;
  return tally(ev, costs).total();
}

}  // namespace

double compare_reuse_energy(const FeatureMap& x, const LayerSpec& layer,
                            const Im2ColConfig& cfg, const EnergyCostTable& costs) {
  Im2ColConfig off = cfg;
  off.neighbor_buf_cap = 0;
  off.reserved_buf_cap = 0;
  const double e_on = im2col_energy(simulate_im2col(x, layer, cfg).stats, costs);
  const double e_off = im2col_energy(simulate_im2col(x, layer, off).stats, costs);
  if (e_off == 0) return 0;
  return 1.0 - e_on / e_off;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string report_csv_header() {
  return "grid,layer_index,kind,mode,out_c,out_h,out_w,"
         "im2col_cycles,gemm_cycles,layer_cycles,"
         "sram_reads,neighbor_forwards,reserved_hits,padding_zeros,elements_emitted,"
         "streamed_positions,skipped_by_m1,skipped_by_feature,mac_ops,gated_macs,"
         "row_occupancy,col_occupancy,mac_active_fraction,"
         "dram_reads,sram_writes,buffer_accesses,metadata_ops,"
         "energy_dram,energy_sram_read,energy_sram_write,energy_buffer,"
         "energy_mac,energy_metadata,energy_total,verified";
}

std::string report_csv_row(const SimReport& r) {
  std::string s;
  s += r.grid + ",";
  s += std::to_string(r.layer_index) + "," + r.kind + "," + r.mode + ",";
  s += std::to_string(r.out_c) + "," + std::to_string(r.out_h) + "," +
       std::to_string(r.out_w) + ",";
  s += std::to_string(r.im2col_cycles) + "," + std::to_string(r.gemm_cycles) + "," +
       std::to_string(r.layer_cycles) + ",";
  s += std::to_string(r.sram_reads) + "," + std::to_string(r.neighbor_forwards) + "," +
       std::to_string(r.reserved_hits) + "," + std::to_string(r.padding_zeros) + "," +
       std::to_string(r.elements_emitted) + ",";
  s += std::to_string(r.streamed_positions) + "," + std::to_string(r.skipped_by_m1) + "," +
       std::to_string(r.skipped_by_feature) + "," + std::to_string(r.mac_ops) + "," +
       std::to_string(r.gated_macs) + ",";
  s += fmt_double(r.row_occupancy) + "," + fmt_double(r.col_occupancy) + "," +
       fmt_double(r.mac_active_fraction) + ",";
  s += std::to_string(r.dram_reads) + "," + std::to_string(r.sram_writes) + "," +
       std::to_string(r.buffer_accesses) + "," + std::to_string(r.metadata_ops) + ",";
  s += fmt_double(r.energy.dram) + "," + fmt_double(r.energy.sram_read) + "," +
       fmt_double(r.energy.sram_write) + "," + fmt_double(r.energy.buffer) + "," +
       fmt_double(r.energy.mac) + "," + fmt_double(r.energy.metadata) + "," +
       fmt_double(r.energy.total()) + ",";
  s += r.verified ? "1" : "0";
  return s;
}

void write_report_csv(std::ostream& os, const std::vector<SimReport>& rows) {
  os << report_csv_header() << "\n";
  for (const SimReport& r : rows) os << report_csv_row(r) << "\n";
}

void write_report_json(std::ostream& os, const std::vector<SimReport>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const SimReport& r : rows) {
    nlohmann::ordered_json j;
    j["grid"] = r.grid;
    j["layer_index"] = r.layer_index;
    j["kind"] = r.kind;
    j["mode"] = r.mode;
    j["out_c"] = r.out_c;
    j["out_h"] = r.out_h;
    j["out_w"] = r.out_w;
    j["im2col_cycles"] = r.im2col_cycles;
    j["gemm_cycles"] = r.gemm_cycles;
    j["layer_cycles"] = r.layer_cycles;
    j["sram_reads"] = r.sram_reads;
    j["neighbor_forwards"] = r.neighbor_forwards;
    j["reserved_hits"] = r.reserved_hits;
    j["padding_zeros"] = r.padding_zeros;
    j["elements_emitted"] = r.elements_emitted;
    j["streamed_positions"] = r.streamed_positions;
    j["skipped_by_m1"] = r.skipped_by_m1;
    j["skipped_by_feature"] = r.skipped_by_feature;
    j["mac_ops"] = r.mac_ops;
    j["gated_macs"] = r.gated_macs;
    j["row_occupancy"] = fmt_double(r.row_occupancy);
    j["col_occupancy"] = fmt_double(r.col_occupancy);
    j["mac_active_fraction"] = fmt_double(r.mac_active_fraction);
    j["dram_reads"] = r.dram_reads;
    j["sram_writes"] = r.sram_writes;
    j["buffer_accesses"] = r.buffer_accesses;
    j["metadata_ops"] = r.metadata_ops;
    j["energy_dram"] = fmt_double(r.energy.dram);
    j["energy_sram_read"] = fmt_double(r.energy.sram_read);
    j["energy_sram_write"] = fmt_double(r.energy.sram_write);
    j["energy_buffer"] = fmt_double(r.energy.buffer);
    j["energy_mac"] = fmt_double(r.energy.mac);
    j["energy_metadata"] = fmt_double(r.energy.metadata);
    j["energy_total"] = fmt_double(r.energy.total());
    j["verified"] = r.verified;
    out.push_back(std::move(j));
  }
  os << out.dump(2) << "\n";
}

}  // namespace spots
