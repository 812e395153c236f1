#pragma once

#include "scflab/diagnostics.hpp"
#include "scflab/scf.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace scflab {

struct DiagnosticsConfig {
  bool descent = true;
  bool wpbound = true;
  bool series = true;
  bool theorem1 = true;
  bool lojasiewicz = true;
  bool monitored = true;
  int ubound_samples = 0;  // 0 disables the sampled alignment check
  double lojasiewicz_tail = 0.25;
};

struct RunConfig {
  std::string backend;  // "gaussian" | "grid1d"
  // gaussian
  std::filesystem::path basis_file;
  double kinetic_factor = 1.0;
  // shared
  Geometry geometry;
  // grid1d
  double half_width = 12.0;
  int points = 256;
  double softening = 1.0;

  ScfConfig scf;
  DiagnosticsConfig diagnostics;
  std::string trace_name = "trace.csv";
  std::string report_name = "report.json";
};

// Sectioned key = value text ([backend], [scf], [diagnostics], [output]).
// Relative paths resolve against base_dir. Defaults are applied for every
// omitted key; violations name the offending field.
RunConfig parse_config(const std::string& text,
                       const std::filesystem::path& base_dir);
RunConfig load_config_file(const std::filesystem::path& path);

// Single-line canonical rendering of a config; embedded in trace headers and
// parseable back, so offline checks can rebuild the basis.
std::string canonical_echo(const RunConfig& cfg);
RunConfig parse_echo(const std::string& echo);

BasisContext build_backend(const RunConfig& cfg);

// 17-significant-digit rendering used for every double written to disk.
std::string format_g17(double x);

std::uint64_t basis_fingerprint(const BasisContext& ctx);

struct TraceHeader {
  std::string version;
  std::string config_echo;
  std::string backend_tag;
  int dim = 0;
  int electron_count = 0;
  std::string fingerprint;
  std::string stop_reason;
  std::string verdict;
};

std::string render_trace(const ScfTrace& trace, const RunConfig& cfg,
                         const BasisContext& ctx);
ScfTrace parse_trace(const std::string& text, TraceHeader* header = nullptr);

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

// run:  0 converged, 2 two-cycle, 3 undetermined, 1 error
int cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir,
            bool quiet);
// scan: 0 on success (rows carry their own verdicts), 1 error
int cmd_scan(const RunConfig& base, const std::string& axis,
             const std::vector<double>& values,
             const std::filesystem::path& out_dir, bool quiet);
// check: 0 all checks pass, 4 some check failed, 1 error
int cmd_check(const std::filesystem::path& trace_path,
              const std::filesystem::path& out_dir, bool quiet);

}  // namespace scflab
