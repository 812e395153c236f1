#include "scflab/io.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace scflab;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("scflab_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// small grid config that runs fast
std::string small_grid_config() {
  return "[backend]\n"
         "type = grid1d\n"
         "half_width = 8\n"
         "points = 40\n"
         "softening = 1.0\n"
         "nuclei = 2 0\n"
         "electrons = 2\n"
         "[scf]\n"
         "max_iterations = 300\n"
         "convergence_threshold = 1e-10\n"
         "[output]\n"
         "trace = t.csv\n"
         "report = r.json\n";
}

}  // namespace

TEST_CASE("parse_config applies grid defaults") {
  RunConfig cfg = parse_config("[backend]\ntype = grid1d\nnuclei = 1 0\n", ".");
  CHECK(cfg.half_width == 12.0);
  CHECK(cfg.points == 256);
  CHECK(cfg.softening == 1.0);
  CHECK(cfg.scf.max_iterations == 200);
  CHECK(cfg.scf.convergence_threshold == 1e-9);
  CHECK(cfg.diagnostics.lojasiewicz_tail == 0.25);
}

TEST_CASE("parse_config rejects invalid values with field names") {
  CHECK_THROWS_WITH_AS(
      parse_config("[backend]\ntype = grid1d\npoints = 4\nnuclei = 1 0\n", "."),
      "backend.points: n >= 16 required", ConfigError);
  CHECK_THROWS_AS(parse_config("[backend]\ntype = hartree\n", "."),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("stray line\n", "."), ConfigError);
  CHECK_THROWS_AS(
      parse_config("[backend]\ntype = grid1d\nnuclei = 1 0\nbogus = 1\n", "."),
      ConfigError);
  // malformed syntax carries the line number
  try {
    parse_config("[backend]\ntype = grid1d\nnuclei = 1 0\nno equals sign\n",
                 ".");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("config echo round-trips and reproduces the fingerprint") {
  RunConfig cfg = load_config_file(testing::config_dir() / "h2_sto3g.ini");
  BasisContext ctx = build_backend(cfg);
  RunConfig back = parse_echo(canonical_echo(cfg));
  BasisContext ctx2 = build_backend(back);
  CHECK(basis_fingerprint(ctx) == basis_fingerprint(ctx2));
  CHECK(canonical_echo(cfg) == canonical_echo(back));
}

TEST_CASE("trace serialization round-trips byte for byte") {
  RunConfig cfg = parse_config(small_grid_config(), ".");
  BasisContext ctx = build_backend(cfg);
  auto [trace, report] = run_scf(ctx, cfg.scf);
  const std::string text = render_trace(trace, cfg, ctx);

  TraceHeader header;
  ScfTrace parsed = parse_trace(text, &header);
  CHECK(header.verdict == trace.verdict);
  CHECK(parsed.rows.size() == trace.rows.size());
  CHECK(render_trace(parsed, parse_echo(header.config_echo), ctx) == text);
}

TEST_CASE("cmd_run is deterministic byte for byte") {
  RunConfig cfg = parse_config(small_grid_config(), ".");
  const auto dir1 = fresh_dir("det1");
  const auto dir2 = fresh_dir("det2");
  CHECK(cmd_run(cfg, dir1, true) == 0);
  CHECK(cmd_run(cfg, dir2, true) == 0);
  CHECK(read_file(dir1 / "t.csv") == read_file(dir2 / "t.csv"));
  CHECK(read_file(dir1 / "r.json") == read_file(dir2 / "r.json"));
}

TEST_CASE("cmd_run reports missing files as exit 1") {
  RunConfig cfg;
  cfg.backend = "gaussian";
  cfg.basis_file = "/nonexistent/file.basis";
  cfg.geometry.nuclei = {{1.0, {0.0, 0.0, 0.0}}};
  cfg.geometry.electron_count = 1;
  CHECK(cmd_run(cfg, fresh_dir("missing"), true) == 1);
}

TEST_CASE("cmd_check recomputes checks and notices tampering") {
  RunConfig cfg = parse_config(small_grid_config(), ".");
  const auto dir = fresh_dir("check");
  REQUIRE(cmd_run(cfg, dir, true) == 0);

  CHECK(cmd_check(dir / "t.csv", dir, true) == 0);

  // hand-edit one pair energy upward: descent must fail -> exit 4
  std::string text = read_file(dir / "t.csv");
  TraceHeader header;
  ScfTrace trace = parse_trace(text, &header);
  REQUIRE(trace.rows.size() > 4);
  trace.rows[3].pair_energy = trace.rows[2].pair_energy + 1e-3;
  RunConfig echoed = parse_echo(header.config_echo);
  BasisContext ctx = build_backend(echoed);
  write_file_atomic(dir / "edited.csv", render_trace(trace, echoed, ctx));
  CHECK(cmd_check(dir / "edited.csv", dir, true) == 4);

  // truncated file (header only, data gone) -> parse error -> exit 1
  size_t third_newline = 0;
  for (int i = 0; i < 3; ++i)
    third_newline = text.find('\n', third_newline) + 1;
  write_file_atomic(dir / "truncated.csv", text.substr(0, third_newline));
  CHECK(cmd_check(dir / "truncated.csv", dir, true) == 1);

  // stale trace: header echo pointing at a different discretization
  const auto pos = text.find("points=40");
  REQUIRE(pos != std::string::npos);
  std::string stale = text;
  stale.replace(pos, 9, "points=48");
  write_file_atomic(dir / "stale.csv", stale);
  CHECK(cmd_check(dir / "stale.csv", dir, true) == 1);
}

TEST_CASE("cmd_scan produces one row per value") {
  RunConfig cfg = parse_config(small_grid_config(), ".");
  cfg.geometry.nuclei = {{1.0, {-1.0, 0.0, 0.0}}, {1.0, {1.0, 0.0, 0.0}}};
  const auto dir = fresh_dir("scan");
  CHECK(cmd_scan(cfg, "separation", {1.5, 2.0, 2.5, 3.0, 3.5}, dir, true) == 0);
  const std::string csv = read_file(dir / "scan_separation.csv");
  // header + 5 rows
  size_t lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 6);
  CHECK(csv.find("verdict") != std::string::npos);

  CHECK(cmd_scan(cfg, "separation", {}, dir, true) == 1);
  CHECK(cmd_scan(cfg, "bogus_axis", {1.0}, dir, true) == 1);
}

TEST_CASE("format_g17 round-trips doubles") {
  for (double x : {1.0 / 3.0, 2.718281828459045, -1.4e-13, 0.0, 1e300}) {
    const double back = std::strtod(format_g17(x).c_str(), nullptr);
    CHECK(back == x);
  }
}
