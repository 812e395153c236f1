#include "scflab/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <string>
#include <vector>

namespace {

std::filesystem::path resolve_out(const std::string& flag_value) {
  // SCFLAB_OUT wins over --out
  if (const char* env = std::getenv("SCFLAB_OUT"); env && *env) return env;
  return flag_value;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::string cur;
  auto flush = [&]() {
    if (cur.empty()) return;
    out.push_back(std::stod(cur));
    cur.clear();
  };
  for (char c : csv) {
    if (c == ',') flush();
    else cur += c;
  }
  flush();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scflab: SCF runs with convergence diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string axis;
  std::string values_csv;
  std::string trace_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool quiet = false;

  app.add_flag("--quiet", quiet, "suppress per-check output");

  CLI::App* run = app.add_subcommand("run", "run one SCF calculation");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_given = true; });

  CLI::App* scan = app.add_subcommand("scan", "run along a parameter axis");
  scan->add_option("--config", config_path, "config template")->required();
  scan->add_option("--axis", axis, "scannable parameter name")->required();
  scan->add_option("--values", values_csv, "comma-separated values")
      ->required();
  scan->add_option("--out", out_dir, "output directory");
  scan->add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_given = true; });

  CLI::App* check = app.add_subcommand("check", "recompute checks on a trace");
  check->add_option("trace", trace_path, "trace CSV file")->required();
  check->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      scflab::RunConfig cfg = scflab::load_config_file(config_path);
      if (seed_given) cfg.scf.seed = seed;
      return scflab::cmd_run(cfg, resolve_out(out_dir), quiet);
    }
    if (scan->parsed()) {
      scflab::RunConfig cfg = scflab::load_config_file(config_path);
      if (seed_given) cfg.scf.seed = seed;
      return scflab::cmd_scan(cfg, axis, parse_values(values_csv),
                              resolve_out(out_dir), quiet);
    }
    return scflab::cmd_check(trace_path, resolve_out(out_dir), quiet);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
