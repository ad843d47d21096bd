#include "spots/network.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "spots/reference.hpp"

namespace spots {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

long long parse_int(const std::string& v, const std::string& origin, int line) {
  try {
    size_t used = 0;
    long long x = std::stoll(v, &used);
    if (used != v.size()) fail(origin, line, "bad integer '" + v + "'");
    return x;
  } catch (const std::logic_error&) {
    fail(origin, line, "bad integer '" + v + "'");
  }
}

double parse_real(const std::string& v, const std::string& origin, int line) {
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) fail(origin, line, "bad number '" + v + "'");
    return x;
  } catch (const std::logic_error&) {
    fail(origin, line, "bad number '" + v + "'");
  }
}

bool parse_flag(const std::string& v, const std::string& origin, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(origin, line, "bad boolean '" + v + "', want true/false");
}

u64 parse_cap(const std::string& v, const std::string& origin, int line) {
  if (v == "unbounded") return kUnboundedCap;
  long long x = parse_int(v, origin, line);
  if (x < 0) fail(origin, line, "capacity cannot be negative");
  return static_cast<u64>(x);
}

// "seed:<n>" or "file:<path>" for weights, "seed:<n>" or "none" for bias.
bool split_tagged(const std::string& v, const std::string& tag, std::string* rest) {
  if (v.rfind(tag + ":", 0) != 0) return false;
  *rest = v.substr(tag.size() + 1);
  return true;
}

}  // namespace

NetworkConfig parse_network_config(const std::string& text, const std::string& origin) {
  NetworkConfig cfg;
  std::string section;
  std::vector<int> layer_lines;  // header line of each [layer], for resolve errors
  std::istringstream in(text);
  std::string raw;
  int line = 0;

  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    size_t hash = s.find('#');
    if (hash != std::string::npos) s.erase(hash);
    s = trim(s);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') fail(origin, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "network" && section != "hardware" && section != "energy" &&
          section != "input" && section != "layer")
        fail(origin, line, "unknown section [" + section + "]");
      if (section == "layer") {
        cfg.layers.emplace_back();
        layer_lines.push_back(line);
      }
      continue;
    }

    size_t eq = s.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty() || val.empty()) fail(origin, line, "expected key = value");
    if (section.empty()) fail(origin, line, "key outside any section");

    if (section == "network") {
      if (key == "name") cfg.name = val;
      else if (key == "verify") cfg.verify = parse_flag(val, origin, line);
      else if (key == "debug_corrupt_layer")
        cfg.debug_corrupt_layer = static_cast<int>(parse_int(val, origin, line));
      else fail(origin, line, "unknown key '" + key + "' in [network]");
    } else if (section == "hardware") {
      HardwareConfig& hw = cfg.hw;
      if (key == "array_rows") hw.array.rows = static_cast<int>(parse_int(val, origin, line));
      else if (key == "array_cols") hw.array.cols = static_cast<int>(parse_int(val, origin, line));
      else if (key == "regs_per_pe") hw.array.regs_per_pe = static_cast<int>(parse_int(val, origin, line));
      else if (key == "split_factor") hw.array.split_factor = static_cast<int>(parse_int(val, origin, line));
      else if (key == "pass_limit") hw.array.pass_limit = static_cast<int>(parse_int(val, origin, line));
      else if (key == "track_overflow24") hw.array.track_overflow24 = parse_flag(val, origin, line);
      else if (key == "pu_count") hw.im2col.pu_count = static_cast<int>(parse_int(val, origin, line));
      else if (key == "sram_bandwidth") hw.im2col.sram_bandwidth = static_cast<int>(parse_int(val, origin, line));
      else if (key == "ring_bandwidth") hw.im2col.ring_bandwidth = static_cast<int>(parse_int(val, origin, line));
      else if (key == "new_buf_cap") hw.im2col.new_buf_cap = parse_cap(val, origin, line);
      else if (key == "neighbor_buf_cap") hw.im2col.neighbor_buf_cap = parse_cap(val, origin, line);
      else if (key == "reserved_buf_cap") hw.im2col.reserved_buf_cap = parse_cap(val, origin, line);
      else if (key == "feature_block") hw.feature_block = static_cast<int>(parse_int(val, origin, line));
      else if (key == "bank_count") hw.bank_count = static_cast<int>(parse_int(val, origin, line));
      else if (key == "prune_group") hw.prune.group = static_cast<int>(parse_int(val, origin, line));
      else if (key == "prune_threshold") hw.prune.threshold = static_cast<i32>(parse_int(val, origin, line));
      else if (key == "prune_norm") {
        if (val == "maxabs") hw.prune.norm = PruneNorm::kMaxAbs;
        else if (val == "l2") hw.prune.norm = PruneNorm::kL2;
        else fail(origin, line, "prune_norm must be maxabs or l2");
      } else fail(origin, line, "unknown key '" + key + "' in [hardware]");
    } else if (section == "energy") {
      EnergyCostTable& e = cfg.hw.energy;
      if (key == "dram_read") e.dram_read = parse_real(val, origin, line);
      else if (key == "sram_read") e.sram_read = parse_real(val, origin, line);
      else if (key == "sram_write") e.sram_write = parse_real(val, origin, line);
      else if (key == "buffer_access") e.buffer_access = parse_real(val, origin, line);
      else if (key == "mac_op") e.mac_op = parse_real(val, origin, line);
      else if (key == "metadata_op") e.metadata_op = parse_real(val, origin, line);
      else fail(origin, line, "unknown key '" + key + "' in [energy]");
    } else if (section == "input") {
      if (key == "channels") cfg.in_channels = static_cast<int>(parse_int(val, origin, line));
      else if (key == "height") cfg.in_height = static_cast<int>(parse_int(val, origin, line));
      else if (key == "width") cfg.in_width = static_cast<int>(parse_int(val, origin, line));
      else fail(origin, line, "unknown key '" + key + "' in [input]");
    } else {  // layer
      LayerEntry& e = cfg.layers.back();
      LayerSpec& sp = e.spec;
      if (key == "kind") {
        if (val == "conv") sp.kind = LayerKind::kConv;
        else if (val == "fc") sp.kind = LayerKind::kFullyConnected;
        else if (val == "maxpool") sp.kind = LayerKind::kMaxPool;
        else if (val == "avgpool") sp.kind = LayerKind::kAvgPool;
        else fail(origin, line, "unknown layer kind '" + val + "'");
      } else if (key == "filters") sp.filters = static_cast<int>(parse_int(val, origin, line));
      else if (key == "kernel") {
        sp.kernel_h = sp.kernel_w = static_cast<int>(parse_int(val, origin, line));
      } else if (key == "kernel_h") sp.kernel_h = static_cast<int>(parse_int(val, origin, line));
      else if (key == "kernel_w") sp.kernel_w = static_cast<int>(parse_int(val, origin, line));
      else if (key == "stride") sp.stride = static_cast<int>(parse_int(val, origin, line));
      else if (key == "pad") sp.pad = static_cast<int>(parse_int(val, origin, line));
      else if (key == "batch") sp.batch = static_cast<int>(parse_int(val, origin, line));
      else if (key == "relu") sp.relu = parse_flag(val, origin, line);
      else if (key == "requant_shift") sp.requant_shift = static_cast<int>(parse_int(val, origin, line));
      else if (key == "sparsity") {
        e.weights.sparsity = parse_real(val, origin, line);
        if (e.weights.sparsity < 0.0 || e.weights.sparsity > 1.0)
          fail(origin, line, "sparsity must lie in [0, 1]");
      } else if (key == "weights") {
        std::string rest;
        if (split_tagged(val, "seed", &rest)) {
          e.weights.kind = WeightSource::kSeed;
          e.weights.seed = static_cast<u64>(parse_int(rest, origin, line));
        } else if (split_tagged(val, "file", &rest)) {
          e.weights.kind = WeightSource::kFile;
          e.weights.file = rest;
        } else fail(origin, line, "weights must be seed:<n> or file:<path>");
      } else if (key == "bias") {
        std::string rest;
        if (val == "none") e.has_bias = false;
        else if (split_tagged(val, "seed", &rest)) {
          e.has_bias = true;
          e.bias_seed = static_cast<u64>(parse_int(rest, origin, line));
        } else fail(origin, line, "bias must be none or seed:<n>");
      } else fail(origin, line, "unknown key '" + key + "' in [layer]");
    }
  }

  if (cfg.in_channels <= 0 || cfg.in_height <= 0 || cfg.in_width <= 0)
    throw std::runtime_error(origin + ": missing or incomplete [input] section");
  if (cfg.layers.empty())
    throw std::runtime_error(origin + ": no [layer] sections");

  // Chain layer dimensions from the input map.
  int c = cfg.in_channels, h = cfg.in_height, w = cfg.in_width;
  for (size_t i = 0; i < cfg.layers.size(); ++i) {
    LayerEntry& e = cfg.layers[i];
    LayerSpec& sp = e.spec;
    int hline = layer_lines[i];
    if (sp.kind == LayerKind::kFullyConnected) {
      long long flat = static_cast<long long>(c) * h * w;
      if (sp.batch <= 0 || flat % sp.batch != 0)
        fail(origin, hline, "fc batch does not divide the flattened input");
      sp.channels = static_cast<int>(flat / sp.batch);
      sp.height = 1;
      sp.width = 1;
    } else {
      sp.channels = c;
      sp.height = h;
      sp.width = w;
    }
    if ((sp.kind == LayerKind::kConv || sp.kind == LayerKind::kFullyConnected) &&
        e.weights.kind == WeightSource::kSeed && e.weights.seed == 0)
      e.weights.seed = 1000 + i;  // stable default so configs stay terse
    try {
      sp.validate();
    } catch (const std::exception& ex) {
      fail(origin, hline, std::string("layer ") + std::to_string(i) + ": " + ex.what());
    }
    switch (sp.kind) {
      case LayerKind::kConv:
        c = sp.filters; h = sp.out_h(); w = sp.out_w();
        break;
      case LayerKind::kMaxPool:
      case LayerKind::kAvgPool:
        h = sp.out_h(); w = sp.out_w();
        break;
      case LayerKind::kFullyConnected:
        c = sp.filters; h = 1; w = sp.batch;
        break;
    }
  }

  if (cfg.debug_corrupt_layer >= static_cast<int>(cfg.layers.size()))
    throw std::runtime_error(origin + ": debug_corrupt_layer is out of range");
  return cfg;
}

NetworkConfig load_network_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network_config(buf.str(), path);
}

Mat16 generate_weights(const LayerEntry& e, const HardwareConfig& hw) {
  const LayerSpec& sp = e.spec;
  int rows = sp.filters;
  int cols = sp.kind == LayerKind::kConv ? sp.patch_rows() : sp.fc_inputs();
  std::mt19937_64 rng(e.weights.seed);
  Mat16 w(rows, cols);
  for (auto& v : w.values)
    v = static_cast<i16>(static_cast<int>(rng() % 201) - 100);
  if (e.weights.sparsity > 0.0) {
    // Zero whole prune-group blocks so the generated sparsity is the kind
    // the weight format can actually exploit.
    int g = hw.prune.group;
    u64 cut = static_cast<u64>(e.weights.sparsity * 1000000.0 + 0.5);
    int blocks = (rows + g - 1) / g;
    for (int j = 0; j < cols; ++j)
      for (int b = 0; b < blocks; ++b)
        if (rng() % 1000000 < cut)
          for (int f = b * g; f < std::min(rows, (b + 1) * g); ++f)
            w.at(f, j) = 0;
  }
  return w;
}

std::vector<i16> generate_bias(u64 seed, int filters) {
  std::mt19937_64 rng(seed);
  std::vector<i16> bias(filters);
  for (auto& v : bias) v = static_cast<i16>(static_cast<int>(rng() % 101) - 50);
  return bias;
}

FeatureMap generate_input(u64 seed, int channels, int height, int width) {
  std::mt19937_64 rng(seed);
  FeatureMap x(channels, height, width);
  for (auto& v : x.values) v = static_cast<i16>(static_cast<int>(rng() % 256) - 128);
  return x;
}

Mat16 layer_weights(const LayerEntry& e, const HardwareConfig& hw) {
  const LayerSpec& sp = e.spec;
  int rows = sp.filters;
  int cols = sp.kind == LayerKind::kConv ? sp.patch_rows() : sp.fc_inputs();
  if (e.weights.kind == WeightSource::kSeed) return generate_weights(e, hw);

  std::ifstream probe(e.weights.file, std::ios::binary);
  if (!probe) throw std::runtime_error(e.weights.file + ": cannot open weights");
  char magic[4] = {};
  probe.read(magic, 4);
  probe.close();
  std::string m(magic, 4);

  Mat16 w;
  if (m == "SBSW") {
    w = decode_blocksparse(read_sbsw(e.weights.file));
  } else if (m == "STNS") {
    TensorFile t = read_tensor(e.weights.file);
    if (t.dims.size() == 2) {
      w = mat_from_tensor(t);
    } else if (t.dims.size() == 4 && sp.kind == LayerKind::kConv) {
      FilterSet f(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
                  static_cast<int>(t.dims[2]), static_cast<int>(t.dims[3]));
      f.values = t.values;
      if (f.channels != sp.channels || f.kernel_h != sp.kernel_h || f.kernel_w != sp.kernel_w)
        throw std::runtime_error(e.weights.file + ": filter shape does not match the layer");
      w = flatten_filters(f);
    } else {
      throw std::runtime_error(e.weights.file + ": weights must be rank 2, or rank 4 for conv");
    }
  } else {
    throw std::runtime_error(e.weights.file + ": unrecognized weight file");
  }
  if (w.rows != rows || w.cols != cols)
    throw std::runtime_error(e.weights.file + ": weight matrix is " + std::to_string(w.rows) +
                             "x" + std::to_string(w.cols) + ", layer needs " +
                             std::to_string(rows) + "x" + std::to_string(cols));
  return w;
}

namespace {

// Oracle output for one layer, computed from the same pruned weights the
// engine streams.
FeatureMap layer_oracle(const FeatureMap& x, const LayerEntry& e,
                        const BlockSparseWeights* w, const HardwareConfig& hw) {
  const LayerSpec& sp = e.spec;
  switch (sp.kind) {
    case LayerKind::kConv: {
      Mat16 dense = decode_blocksparse(*w);
      FilterSet f = unflatten_filters(dense, sp.channels, sp.kernel_h, sp.kernel_w);
      return conv_reference(x, f, sp);
    }
    case LayerKind::kMaxPool:
    case LayerKind::kAvgPool:
      return pool_reference(x, sp);
    case LayerKind::kFullyConnected: {
      Mat16 dense = decode_blocksparse(*w);
      Mat16 input(dense.cols, sp.batch);
      for (int b = 0; b < sp.batch; ++b)
        for (int r = 0; r < dense.cols; ++r)
          input.at(r, b) = x.values[static_cast<size_t>(b) * dense.cols + r];
      AccMat acc = fc_reference(dense, input, sp.bias, sp.relu, hw.array.track_overflow24);
      return fc_to_feature(acc, sp);
    }
  }
  throw std::logic_error("unreachable layer kind");
}

}  // namespace

NetworkResult run_network(const NetworkConfig& cfg, const FeatureMap& input) {
  if (input.channels != cfg.in_channels || input.height != cfg.in_height ||
      input.width != cfg.in_width)
    throw std::invalid_argument("run_network: input does not match the [input] section");
  cfg.hw.energy.validate();

  NetworkResult res;
  FeatureMap x = input;
  res.verified_all = cfg.verify;

  for (size_t i = 0; i < cfg.layers.size(); ++i) {
    LayerEntry e = cfg.layers[i];
    LayerSpec& sp = e.spec;
    if (e.has_bias) sp.bias = generate_bias(e.bias_seed, sp.filters);

    BlockSparseWeights w;
    bool has_weights = sp.kind == LayerKind::kConv || sp.kind == LayerKind::kFullyConnected;
    if (has_weights) {
      Mat16 pruned = prune_groupwise(layer_weights(e, cfg.hw), cfg.hw.prune);
      w = encode_blocksparse(pruned, cfg.hw.prune.group, cfg.hw.bank_count);
    }

    LayerRunResult run;
    switch (sp.kind) {
      case LayerKind::kConv:
        run = run_conv_layer(x, w, sp, cfg.hw);
        break;
      case LayerKind::kMaxPool:
      case LayerKind::kAvgPool:
        run = run_pool_layer(x, sp, cfg.hw);
        break;
      case LayerKind::kFullyConnected:
        run = run_fc_layer(x, w, sp, cfg.hw);
        break;
    }
    if (static_cast<int>(i) == cfg.debug_corrupt_layer && !run.output.values.empty())
      run.output.values[0] = static_cast<i16>(run.output.values[0] ^ 1);

    SimReport rep = make_report(run, sp, static_cast<int>(i), cfg.hw.energy);
    if (cfg.verify) {
      FeatureMap want = layer_oracle(x, e, has_weights ? &w : nullptr, cfg.hw);
      bool ok = want.same_shape(run.output) && want.values == run.output.values;
      rep.verified = ok;
      if (!ok) {
        res.verified_all = false;
        res.mismatch_found = true;
        res.mismatch.layer = static_cast<int>(i);
        res.mismatch.kind = to_string(sp.kind);
        size_t n = std::min(want.values.size(), run.output.values.size());
        res.mismatch.index = n;  // shape mismatch lands past the end
        for (size_t k = 0; k < n; ++k) {
          if (want.values[k] != run.output.values[k]) {
            res.mismatch.index = k;
            res.mismatch.expected = want.values[k];
            res.mismatch.got = run.output.values[k];
            break;
          }
        }
        res.reports.push_back(rep);
        res.output = run.output;
        return res;  // downstream layers would only chase the corruption
      }
    }
    res.reports.push_back(rep);
    x = run.output;
  }
  res.output = x;
  return res;
}

namespace {

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : v) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else cur.push_back(ch);
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

SweepGrid parse_sweep_grid(const std::string& text, const std::string& origin) {
  SweepGrid g;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    size_t hash = s.find('#');
    if (hash != std::string::npos) s.erase(hash);
    s = trim(s);
    if (s.empty()) continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected key = value list");
    std::string key = trim(s.substr(0, eq));
    std::vector<std::string> vals = split_list(s.substr(eq + 1));
    if (vals.empty()) fail(origin, line, "empty value list for '" + key + "'");
    if (key == "split_factor") {
      for (auto& v : vals) g.split_factor.push_back(static_cast<int>(parse_int(v, origin, line)));
    } else if (key == "reserved_buf_cap") {
      for (auto& v : vals) g.reserved_buf_cap.push_back(parse_cap(v, origin, line));
    } else if (key == "feature_block") {
      for (auto& v : vals) g.feature_block.push_back(static_cast<int>(parse_int(v, origin, line)));
    } else if (key == "prune_group") {
      for (auto& v : vals) g.group.push_back(static_cast<int>(parse_int(v, origin, line)));
    } else if (key == "sram_bandwidth") {
      for (auto& v : vals) g.sram_bandwidth.push_back(static_cast<int>(parse_int(v, origin, line)));
    } else fail(origin, line, "unknown sweep key '" + key + "'");
  }
  return g;
}

SweepGrid load_sweep_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open grid");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sweep_grid(buf.str(), path);
}

std::vector<SimReport> run_sweep(const NetworkConfig& cfg, const SweepGrid& grid,
                                 const FeatureMap& input) {
  auto or_default = [](const std::vector<int>& v, int base) {
    return v.empty() ? std::vector<int>{base} : v;
  };
  std::vector<int> sf = or_default(grid.split_factor, cfg.hw.array.split_factor);
  std::vector<u64> rc = grid.reserved_buf_cap.empty()
                            ? std::vector<u64>{cfg.hw.im2col.reserved_buf_cap}
                            : grid.reserved_buf_cap;
  std::vector<int> bz = or_default(grid.feature_block, cfg.hw.feature_block);
  std::vector<int> gg = or_default(grid.group, cfg.hw.prune.group);
  std::vector<int> bw = or_default(grid.sram_bandwidth, cfg.hw.im2col.sram_bandwidth);

  std::vector<SimReport> out;
  for (int s : sf)
    for (u64 r : rc)
      for (int z : bz)
        for (int g : gg)
          for (int b : bw) {
            NetworkConfig point = cfg;
            point.hw.array.split_factor = s;
            point.hw.im2col.reserved_buf_cap = r;
            point.hw.feature_block = z;
            point.hw.prune.group = g;
            point.hw.im2col.sram_bandwidth = b;
            std::string tag = "split=" + std::to_string(s) + ";rcap=" +
                              (r == kUnboundedCap ? std::string("unbounded") : std::to_string(r)) +
                              ";bz=" + std::to_string(z) + ";g=" + std::to_string(g) +
                              ";bw=" + std::to_string(b);
            NetworkResult nr = run_network(point, input);
            if (nr.mismatch_found)
              throw std::runtime_error("sweep point " + tag + " failed verification at layer " +
                                       std::to_string(nr.mismatch.layer));
            for (auto& rep : nr.reports) {
              rep.grid = tag;
              out.push_back(rep);
            }
          }
  return out;
}

namespace {

struct ZooLayer {
  std::string kind;
  int filters = 0;
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  bool relu = false;
  int shift = 0;
  double sparsity = 0.0;
  bool bias = false;
};

std::string emit_zoo(const std::string& name, int c, int h, int w,
                     const std::vector<ZooLayer>& layers, u64 seed) {
  std::ostringstream os;
  os << "# " << name << ", desk-scale layer stack\n";
  os << "[network]\nname = " << name << "\nverify = true\n\n";
  os << "[hardware]\nprune_group = 4\nfeature_block = 8\n\n";
  os << "[input]\nchannels = " << c << "\nheight = " << h << "\nwidth = " << w << "\n";
  for (size_t i = 0; i < layers.size(); ++i) {
    const ZooLayer& l = layers[i];
    os << "\n[layer]\nkind = " << l.kind << "\n";
    if (l.filters > 0) os << "filters = " << l.filters << "\n";
    if (l.kernel > 0) os << "kernel = " << l.kernel << "\n";
    if (l.stride != 1) os << "stride = " << l.stride << "\n";
    if (l.pad != 0) os << "pad = " << l.pad << "\n";
    if (l.relu) os << "relu = true\n";
    if (l.shift > 0) os << "requant_shift = " << l.shift << "\n";
    if (l.kind == "conv" || l.kind == "fc") {
      os << "weights = seed:" << seed * 100 + i << "\n";
      if (l.sparsity > 0) os << "sparsity = " << l.sparsity << "\n";
      if (l.bias) os << "bias = seed:" << seed * 100 + 50 + i << "\n";
    }
  }
  return os.str();
}

struct ZooEntry {
  int c, h, w;
  std::vector<ZooLayer> layers;
};

ZooEntry zoo_entry(const std::string& name) {
  auto conv = [](int f, int k, int s, int p, int shift, double sp) {
    return ZooLayer{"conv", f, k, s, p, true, shift, sp, true};
  };
  auto maxpool = [](int k, int s) { return ZooLayer{"maxpool", 0, k, s, 0, false, 0, 0, false}; };
  auto avgpool = [](int k, int s) { return ZooLayer{"avgpool", 0, k, s, 0, false, 0, 0, false}; };
  auto fc = [](int f, bool relu, int shift, double sp) {
    return ZooLayer{"fc", f, 0, 1, 0, relu, shift, sp, true};
  };

  if (name == "toy")
    return {3, 16, 16,
            {conv(32, 3, 1, 1, 9, 0.5), maxpool(2, 2), conv(64, 3, 1, 1, 10, 0.6),
             avgpool(2, 2), fc(10, false, 9, 0.5)}};
  if (name == "alexnet")
    return {3, 55, 55,
            {conv(96, 11, 4, 0, 10, 0.5), maxpool(2, 2), conv(256, 5, 1, 2, 11, 0.5),
             maxpool(2, 2), conv(384, 3, 1, 1, 11, 0.5), conv(384, 3, 1, 1, 11, 0.5),
             conv(256, 3, 1, 1, 11, 0.5), maxpool(3, 3), fc(512, true, 9, 0.7),
             fc(512, true, 9, 0.7), fc(10, false, 9, 0.7)}};
  if (name == "vggnet")
    return {3, 24, 24,
            {conv(64, 3, 1, 1, 9, 0.6), conv(64, 3, 1, 1, 10, 0.6), maxpool(2, 2),
             conv(128, 3, 1, 1, 10, 0.6), conv(128, 3, 1, 1, 11, 0.6), maxpool(2, 2),
             conv(256, 3, 1, 1, 11, 0.6), conv(256, 3, 1, 1, 11, 0.6), maxpool(2, 2),
             fc(256, true, 11, 0.7), fc(10, false, 9, 0.7)}};
  if (name == "googlenet")
    return {3, 31, 31,
            {conv(64, 7, 2, 3, 10, 0.6), maxpool(2, 2), conv(64, 1, 1, 0, 9, 0.6),
             conv(192, 3, 1, 1, 10, 0.6), maxpool(2, 2), conv(96, 1, 1, 0, 9, 0.6),
             conv(208, 3, 1, 1, 11, 0.6), conv(256, 1, 1, 0, 10, 0.6), avgpool(4, 4),
             fc(10, false, 9, 0.7)}};
  if (name == "resnet")
    return {3, 33, 33,
            {conv(64, 3, 1, 1, 9, 0.6), conv(64, 3, 1, 1, 10, 0.6),
             conv(128, 3, 2, 1, 10, 0.6), conv(128, 3, 1, 1, 11, 0.6),
             conv(256, 3, 2, 1, 11, 0.6), conv(256, 3, 1, 1, 11, 0.6), avgpool(9, 9),
             fc(10, false, 9, 0.7)}};
  throw std::invalid_argument("unknown zoo network '" + name + "'");
}

}  // namespace

std::vector<std::string> zoo_names() {
  return {"toy", "alexnet", "vggnet", "googlenet", "resnet"};
}

std::string zoo_config(const std::string& name, u64 seed) {
  ZooEntry z = zoo_entry(name);
  return emit_zoo(name, z.c, z.h, z.w, z.layers, seed);
}

FeatureMap zoo_input(const std::string& name, u64 seed) {
  ZooEntry z = zoo_entry(name);
  return generate_input(seed, z.c, z.h, z.w);
}

}  // namespace spots
