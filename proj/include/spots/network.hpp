#pragma once

#include <string>
#include <vector>

#include "spots/layer.hpp"
#include "spots/pipeline.hpp"
#include "spots/sparse.hpp"
#include "spots/tensor.hpp"

namespace spots {

// Where a layer gets its weights from. Seeded generation is the default so a
// config file alone pins down the whole run.
struct WeightSource {
  enum Kind { kSeed, kFile };
  Kind kind = kSeed;
  u64 seed = 0;
  double sparsity = 0.0;  // fraction of weight blocks zeroed at generation time
  std::string file;
};

struct LayerEntry {
  LayerSpec spec;
  WeightSource weights;
  bool has_bias = false;
  u64 bias_seed = 0;
};

struct NetworkConfig {
  std::string name = "net";
  bool verify = false;
  int debug_corrupt_layer = -1;  // test hook, flips one accumulator bit
  HardwareConfig hw;
  int in_channels = 0;
  int in_height = 0;
  int in_width = 0;
  std::vector<LayerEntry> layers;
};

// Sectioned key=value text. Throws std::runtime_error with the offending line
// number on anything it does not understand.
NetworkConfig parse_network_config(const std::string& text, const std::string& origin);
NetworkConfig load_network_config(const std::string& path);

// Deterministic weight/bias material for seeded layers.
Mat16 generate_weights(const LayerEntry& e, const HardwareConfig& hw);
std::vector<i16> generate_bias(u64 seed, int filters);
FeatureMap generate_input(u64 seed, int channels, int height, int width);

// Dense weight matrix for one layer, from its seed or file. Conv files may be
// rank-4 (f, c, r, s) or a pre-flattened rank-2 matrix.
Mat16 layer_weights(const LayerEntry& e, const HardwareConfig& hw);

struct VerifyMismatch {
  int layer = -1;
  std::string kind;
  size_t index = 0;
  i32 expected = 0;
  i32 got = 0;
};

struct NetworkResult {
  FeatureMap output;
  std::vector<SimReport> reports;
  bool verified_all = false;
  bool mismatch_found = false;
  VerifyMismatch mismatch;
};

NetworkResult run_network(const NetworkConfig& cfg, const FeatureMap& input);

// Grid points nest in a fixed order: split_factor, reserved_buf_cap,
// feature_block, prune_group, sram_bandwidth.  An empty dimension keeps the
// base config's value.
struct SweepGrid {
  std::vector<int> split_factor;
  std::vector<u64> reserved_buf_cap;
  std::vector<int> feature_block;
  std::vector<int> group;
  std::vector<int> sram_bandwidth;
};

SweepGrid parse_sweep_grid(const std::string& text, const std::string& origin);
SweepGrid load_sweep_grid(const std::string& path);

std::vector<SimReport> run_sweep(const NetworkConfig& cfg, const SweepGrid& grid,
                                 const FeatureMap& input);

// Built-in desk-size networks. Real channel/filter/kernel shapes, shrunken
// spatial extents so a run finishes in seconds.
std::vector<std::string> zoo_names();
std::string zoo_config(const std::string& name, u64 seed);
FeatureMap zoo_input(const std::string& name, u64 seed);

}  // namespace spots
