#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spots/network.hpp"
#include "spots/reference.hpp"

namespace {

spots::FeatureMap load_or_generate_input(const std::string& path, spots::u64 seed,
                                         const spots::NetworkConfig& cfg) {
  if (path.empty())
    return spots::generate_input(seed, cfg.in_channels, cfg.in_height, cfg.in_width);
  spots::TensorFile t = spots::read_tensor(path);
  spots::FeatureMap x = spots::feature_from_tensor(t);
  if (x.channels != cfg.in_channels || x.height != cfg.in_height || x.width != cfg.in_width)
    throw std::runtime_error(path + ": input tensor does not match the [input] section");
  return x;
}

void write_reports(const std::string& path, const std::string& format,
                   const std::vector<spots::SimReport>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(path + ": cannot open for writing");
  if (format == "json")
    spots::write_report_json(os, rows);
  else
    spots::write_report_csv(os, rows);
}

int cmd_run(const std::string& config, const std::string& input_path, spots::u64 seed,
            bool force_verify, const std::string& report, const std::string& format) {
  spots::NetworkConfig cfg = spots::load_network_config(config);
  if (force_verify) cfg.verify = true;
  spots::FeatureMap x = load_or_generate_input(input_path, seed, cfg);

  spots::NetworkResult res = spots::run_network(cfg, x);
  std::cout << cfg.name << ": " << cfg.layers.size() << " layers\n";
  spots::u64 cycles = 0;
  double energy = 0;
  for (const auto& r : res.reports) {
    std::cout << "layer " << r.layer_index << " " << r.kind << " " << r.mode
              << " out=" << r.out_c << "x" << r.out_h << "x" << r.out_w
              << " cycles=" << r.layer_cycles << " macs=" << r.mac_ops;
    if (cfg.verify) std::cout << " verified=" << (r.verified ? "yes" : "NO");
    std::cout << "\n";
    cycles += r.layer_cycles;
    energy += r.energy.total();
  }
  std::cout << "total cycles=" << cycles << " energy=" << energy << "\n";
  if (!report.empty()) write_reports(report, format, res.reports);
  if (res.mismatch_found) {
    std::cerr << "verification failed: layer " << res.mismatch.layer << " ("
              << res.mismatch.kind << ") index " << res.mismatch.index << " expected "
              << res.mismatch.expected << " got " << res.mismatch.got << "\n";
    return 2;
  }
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& grid_path,
              const std::string& input_path, spots::u64 seed, const std::string& report,
              const std::string& format) {
  spots::NetworkConfig cfg = spots::load_network_config(config);
  spots::SweepGrid grid = spots::load_sweep_grid(grid_path);
  spots::FeatureMap x = load_or_generate_input(input_path, seed, cfg);
  std::vector<spots::SimReport> rows = spots::run_sweep(cfg, grid, x);
  if (report.empty())
    spots::write_report_csv(std::cout, rows);
  else
    write_reports(report, format, rows);
  std::cerr << rows.size() << " report rows\n";
  return 0;
}

int cmd_encode(const std::string& input_path, const std::string& output_path, int group,
               int banks, long long threshold, const std::string& norm) {
  spots::TensorFile t = spots::read_tensor(input_path);
  spots::Mat16 w;
  if (t.dims.size() == 2) {
    w = spots::mat_from_tensor(t);
  } else if (t.dims.size() == 4) {
    spots::FilterSet f(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
                       static_cast<int>(t.dims[2]), static_cast<int>(t.dims[3]));
    f.values = t.values;
    w = spots::flatten_filters(f);
  } else {
    throw std::runtime_error(input_path + ": weights must be rank 2 or rank 4");
  }
  spots::PruneConfig pc;
  pc.group = group;
  pc.threshold = static_cast<spots::i32>(threshold);
  pc.norm = norm == "l2" ? spots::PruneNorm::kL2 : spots::PruneNorm::kMaxAbs;
  spots::Mat16 pruned = spots::prune_groupwise(w, pc);
  spots::BlockSparseWeights s = spots::encode_blocksparse(pruned, group, banks);
  spots::write_sbsw(output_path, s);
  std::cout << "encoded " << w.rows << "x" << w.cols << " group=" << group
            << " nonzero_cols=" << s.nonzero_cols() << " values=" << s.stored_values()
            << "\n";
  std::cout << "bytes blocksparse=" << spots::footprint_blocksparse(s)
            << " csr=" << spots::footprint_csr(pruned)
            << " dense=" << static_cast<spots::u64>(w.values.size()) * 2 << "\n";
  return 0;
}

int cmd_gen_net(const std::string& name, const std::string& out_dir, spots::u64 seed) {
  std::string cfg_text = spots::zoo_config(name, seed);
  spots::FeatureMap input = spots::zoo_input(name, seed);
  std::string cfg_path = out_dir + "/" + name + ".cfg";
  std::string input_path = out_dir + "/" + name + "_input.stns";
  std::ofstream os(cfg_path, std::ios::binary);
  if (!os) throw std::runtime_error(cfg_path + ": cannot open for writing");
  os << cfg_text;
  os.close();
  spots::write_tensor(input_path, spots::to_tensor(input));
  std::cout << cfg_path << "\n" << input_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse CNN accelerator simulator"};
  app.require_subcommand(1);

  std::string config, input_path, report, grid_path;
  std::string format = "csv";
  spots::u64 seed = 1;
  bool force_verify = false;

  CLI::App* run = app.add_subcommand("run", "run a network and report per-layer stats");
  run->add_option("--config", config, "network config file")->required()->check(CLI::ExistingFile);
  run->add_option("--input", input_path, "input tensor (.stns), generated from --seed when absent")
      ->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "seed for a generated input");
  run->add_flag("--verify", force_verify, "check every layer against the reference model");
  run->add_option("--report", report, "write per-layer reports to this file");
  run->add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));

  CLI::App* sweep = app.add_subcommand("sweep", "run a config across a parameter grid");
  sweep->add_option("--config", config, "network config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid_path, "sweep grid file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--input", input_path, "input tensor (.stns)")->check(CLI::ExistingFile);
  sweep->add_option("--seed", seed, "seed for a generated input");
  sweep->add_option("--report", report, "write report rows here instead of stdout");
  sweep->add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));

  std::string enc_in, enc_out, norm = "maxabs";
  int group = 4, banks = 4;
  long long threshold = 0;
  CLI::App* enc = app.add_subcommand("encode-weights", "prune and pack a dense weight tensor");
  enc->add_option("--input", enc_in, "dense weights (.stns, rank 2 or 4)")->required()->check(CLI::ExistingFile);
  enc->add_option("--output", enc_out, "packed output (.sbsw)")->required();
  enc->add_option("--group", group, "prune block height");
  enc->add_option("--banks", banks, "weight memory banks");
  enc->add_option("--threshold", threshold, "prune blocks with norm below this");
  enc->add_option("--norm", norm, "block norm")->check(CLI::IsMember({"maxabs", "l2"}));

  std::string zoo_name, out_dir = ".";
  CLI::App* gen = app.add_subcommand("gen-net", "write a built-in network config and input");
  gen->add_option("--name", zoo_name, "network name")
      ->required()
      ->check(CLI::IsMember(spots::zoo_names()));
  gen->add_option("--out-dir", out_dir, "output directory");
  gen->add_option("--seed", seed, "seed for weights and input");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(config, input_path, seed, force_verify, report, format);
    if (sweep->parsed()) return cmd_sweep(config, grid_path, input_path, seed, report, format);
    if (enc->parsed()) return cmd_encode(enc_in, enc_out, group, banks, threshold, norm);
    if (gen->parsed()) return cmd_gen_net(zoo_name, out_dir, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
