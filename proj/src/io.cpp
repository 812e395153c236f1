#include "scflab/io.hpp"

#include "scflab/rng.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace scflab {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& value,
                    long line = -1) {
  char* end = nullptr;
  const double x = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError(field + ": not a number: '" + value + "'", line);
  return x;
}

long parse_long(const std::string& field, const std::string& value,
                long line = -1) {
  char* end = nullptr;
  const long x = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError(field + ": not an integer: '" + value + "'", line);
  return x;
}

std::uint64_t parse_u64(const std::string& field, const std::string& value,
                        long line = -1) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError(field + ": not an unsigned integer: '" + value + "'",
                      line);
  return x;
}

bool parse_bool(const std::string& field, const std::string& value,
                long line = -1) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ConfigError(field + ": expected on/off: '" + value + "'", line);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// "Z x [y z]" groups separated by ';'
std::vector<Nucleus> parse_nuclei(const std::string& field,
                                  const std::string& value, long line = -1) {
  std::vector<Nucleus> out;
  for (const std::string& groupRaw : split(value, ';')) {
    const std::string group = trim(groupRaw);
    if (group.empty()) continue;
    std::istringstream ss(group);
    std::vector<double> nums;
    double x = 0.0;
    while (ss >> x) nums.push_back(x);
    if (!ss.eof())
      throw ConfigError(field + ": malformed nucleus '" + group + "'", line);
    Nucleus nuc;
    if (nums.size() == 2) {
      nuc.charge = nums[0];
      nuc.position = Eigen::Vector3d(nums[1], 0.0, 0.0);
    } else if (nums.size() == 4) {
      nuc.charge = nums[0];
      nuc.position = Eigen::Vector3d(nums[1], nums[2], nums[3]);
    } else {
      throw ConfigError(field + ": expected 'Z x' or 'Z x y z'", line);
    }
    out.push_back(nuc);
  }
  if (out.empty()) throw ConfigError(field + ": no nuclei given", line);
  return out;
}

std::string render_nuclei(const std::vector<Nucleus>& nuclei) {
  std::string out;
  for (size_t i = 0; i < nuclei.size(); ++i) {
    if (i) out += ",";
    out += format_g17(nuclei[i].charge) + "@" +
           format_g17(nuclei[i].position.x()) + "@" +
           format_g17(nuclei[i].position.y()) + "@" +
           format_g17(nuclei[i].position.z());
  }
  return out;
}

std::vector<Nucleus> parse_nuclei_echo(const std::string& value) {
  std::vector<Nucleus> out;
  for (const std::string& group : split(value, ',')) {
    const std::vector<std::string> parts = split(group, '@');
    if (parts.size() != 4) throw ConfigError("echo nuclei malformed");
    Nucleus nuc;
    nuc.charge = parse_double("nuclei", parts[0]);
    nuc.position = Eigen::Vector3d(parse_double("nuclei", parts[1]),
                                   parse_double("nuclei", parts[2]),
                                   parse_double("nuclei", parts[3]));
    out.push_back(nuc);
  }
  return out;
}

void validate(const RunConfig& cfg) {
  if (cfg.backend != "gaussian" && cfg.backend != "grid1d")
    throw ConfigError("backend.type: must be gaussian or grid1d");
  if (cfg.geometry.nuclei.empty() && cfg.backend == "gaussian")
    throw ConfigError("backend.nuclei: required for the gaussian backend");
  if (cfg.geometry.electron_count < 1)
    throw ConfigError("backend.electrons: must be >= 1");
  if (cfg.backend == "gaussian") {
    if (cfg.basis_file.empty())
      throw ConfigError("backend.basis: required for the gaussian backend");
    if (!std::filesystem::exists(cfg.basis_file))
      throw ConfigError("backend.basis: file not found: " +
                        cfg.basis_file.string());
  } else {
    if (cfg.half_width <= 0.0)
      throw ConfigError("backend.half_width: L > 0 required");
    if (cfg.points < 16) throw ConfigError("backend.points: n >= 16 required");
    if (cfg.softening <= 0.0)
      throw ConfigError("backend.softening: a > 0 required");
  }
  if (cfg.scf.max_iterations < 2)
    throw ConfigError("scf.max_iterations: must be >= 2");
  if (cfg.scf.convergence_threshold <= 0.0)
    throw ConfigError("scf.convergence_threshold: must be > 0");
  if (cfg.scf.gap_floor <= 0.0) throw ConfigError("scf.gap_floor: must be > 0");
  if (cfg.scf.tie_tolerance <= 0.0)
    throw ConfigError("scf.tie_tolerance: must be > 0");
  if (!(cfg.diagnostics.lojasiewicz_tail > 0.0 &&
        cfg.diagnostics.lojasiewicz_tail <= 1.0))
    throw ConfigError("diagnostics.lojasiewicz_tail: must be in (0, 1]");
  if (cfg.diagnostics.ubound_samples < 0)
    throw ConfigError("diagnostics.ubound_samples: must be >= 0");
}

}  // namespace

RunConfig parse_config(const std::string& text,
                       const std::filesystem::path& base_dir) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  long lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("unterminated section header", lineno);
      section = line.substr(1, line.size() - 2);
      if (section != "backend" && section != "scf" &&
          section != "diagnostics" && section != "output")
        throw ConfigError("unknown section [" + section + "]", lineno);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'", lineno);
    if (section.empty())
      throw ConfigError("key outside of any section", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string field = section + "." + key;

    if (section == "backend") {
      if (key == "type") cfg.backend = value;
      else if (key == "basis")
        cfg.basis_file = std::filesystem::absolute(base_dir / value)
                             .lexically_normal();
      else if (key == "nuclei")
        cfg.geometry.nuclei = parse_nuclei(field, value, lineno);
      else if (key == "electrons")
        cfg.geometry.electron_count =
            static_cast<int>(parse_long(field, value, lineno));
      else if (key == "kinetic_factor")
        cfg.kinetic_factor = parse_double(field, value, lineno);
      else if (key == "half_width")
        cfg.half_width = parse_double(field, value, lineno);
      else if (key == "points")
        cfg.points = static_cast<int>(parse_long(field, value, lineno));
      else if (key == "softening")
        cfg.softening = parse_double(field, value, lineno);
      else throw ConfigError("unknown key " + field, lineno);
    } else if (section == "scf") {
      if (key == "max_iterations")
        cfg.scf.max_iterations =
            static_cast<int>(parse_long(field, value, lineno));
      else if (key == "convergence_threshold")
        cfg.scf.convergence_threshold = parse_double(field, value, lineno);
      else if (key == "gap_floor")
        cfg.scf.gap_floor = parse_double(field, value, lineno);
      else if (key == "tie_tolerance")
        cfg.scf.tie_tolerance = parse_double(field, value, lineno);
      else if (key == "initial_guess") {
        if (value == "core") cfg.scf.initial_guess = InitialGuess::Core;
        else if (value == "random-orthonormal")
          cfg.scf.initial_guess = InitialGuess::RandomOrthonormal;
        else
          throw ConfigError(field + ": expected core or random-orthonormal",
                            lineno);
      } else if (key == "residual_threshold")
        cfg.scf.residual_threshold = parse_double(field, value, lineno);
      else if (key == "theta_tolerance")
        cfg.scf.theta_tolerance = parse_double(field, value, lineno);
      else if (key == "oscillation_floor")
        cfg.scf.oscillation_floor = parse_double(field, value, lineno);
      else if (key == "homo_threshold")
        cfg.scf.homo_threshold = parse_double(field, value, lineno);
      else if (key == "seed")
        cfg.scf.seed = parse_u64(field, value, lineno);
      else throw ConfigError("unknown key " + field, lineno);
    } else if (section == "diagnostics") {
      if (key == "descent") cfg.diagnostics.descent = parse_bool(field, value, lineno);
      else if (key == "wpbound") cfg.diagnostics.wpbound = parse_bool(field, value, lineno);
      else if (key == "series") cfg.diagnostics.series = parse_bool(field, value, lineno);
      else if (key == "theorem1") cfg.diagnostics.theorem1 = parse_bool(field, value, lineno);
      else if (key == "lojasiewicz") cfg.diagnostics.lojasiewicz = parse_bool(field, value, lineno);
      else if (key == "monitored") cfg.diagnostics.monitored = parse_bool(field, value, lineno);
      else if (key == "ubound_samples")
        cfg.diagnostics.ubound_samples =
            static_cast<int>(parse_long(field, value, lineno));
      else if (key == "lojasiewicz_tail")
        cfg.diagnostics.lojasiewicz_tail = parse_double(field, value, lineno);
      else throw ConfigError("unknown key " + field, lineno);
    } else {  // output
      if (key == "trace") cfg.trace_name = value;
      else if (key == "report") cfg.report_name = value;
      else throw ConfigError("unknown key " + field, lineno);
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string canonical_echo(const RunConfig& cfg) {
  std::string out;
  auto add = [&](const std::string& key, const std::string& value) {
    if (!out.empty()) out += ";";
    out += key + "=" + value;
  };
  add("backend", cfg.backend);
  add("basis", cfg.basis_file.string());
  add("kinetic_factor", format_g17(cfg.kinetic_factor));
  add("nuclei", render_nuclei(cfg.geometry.nuclei));
  add("electrons", std::to_string(cfg.geometry.electron_count));
  add("half_width", format_g17(cfg.half_width));
  add("points", std::to_string(cfg.points));
  add("softening", format_g17(cfg.softening));
  add("max_iterations", std::to_string(cfg.scf.max_iterations));
  add("convergence_threshold", format_g17(cfg.scf.convergence_threshold));
  add("gap_floor", format_g17(cfg.scf.gap_floor));
  add("tie_tolerance", format_g17(cfg.scf.tie_tolerance));
  add("initial_guess", cfg.scf.initial_guess == InitialGuess::Core
                           ? "core"
                           : "random-orthonormal");
  add("residual_threshold", format_g17(cfg.scf.residual_threshold));
  add("theta_tolerance", format_g17(cfg.scf.theta_tolerance));
  add("oscillation_floor", format_g17(cfg.scf.oscillation_floor));
  add("homo_threshold", format_g17(cfg.scf.homo_threshold));
  add("seed", std::to_string(cfg.scf.seed));
  std::string checks;
  auto check = [&](bool on, const char* name) {
    if (on) {
      if (!checks.empty()) checks += ",";
      checks += name;
    }
  };
  check(cfg.diagnostics.descent, "descent");
  check(cfg.diagnostics.wpbound, "wpbound");
  check(cfg.diagnostics.series, "series");
  check(cfg.diagnostics.theorem1, "theorem1");
  check(cfg.diagnostics.lojasiewicz, "lojasiewicz");
  check(cfg.diagnostics.monitored, "monitored");
  add("checks", checks);
  add("ubound_samples", std::to_string(cfg.diagnostics.ubound_samples));
  add("lojasiewicz_tail", format_g17(cfg.diagnostics.lojasiewicz_tail));
  add("trace", cfg.trace_name);
  add("report", cfg.report_name);
  return out;
}

RunConfig parse_echo(const std::string& echo) {
  RunConfig cfg;
  cfg.diagnostics.descent = cfg.diagnostics.wpbound = cfg.diagnostics.series =
      cfg.diagnostics.theorem1 = cfg.diagnostics.lojasiewicz =
          cfg.diagnostics.monitored = false;
  for (const std::string& item : split(echo, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("malformed config echo near '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "backend") cfg.backend = value;
    else if (key == "basis") cfg.basis_file = value;
    else if (key == "kinetic_factor") cfg.kinetic_factor = parse_double(key, value);
    else if (key == "nuclei") cfg.geometry.nuclei = parse_nuclei_echo(value);
    else if (key == "electrons")
      cfg.geometry.electron_count = static_cast<int>(parse_long(key, value));
    else if (key == "half_width") cfg.half_width = parse_double(key, value);
    else if (key == "points") cfg.points = static_cast<int>(parse_long(key, value));
    else if (key == "softening") cfg.softening = parse_double(key, value);
    else if (key == "max_iterations")
      cfg.scf.max_iterations = static_cast<int>(parse_long(key, value));
    else if (key == "convergence_threshold")
      cfg.scf.convergence_threshold = parse_double(key, value);
    else if (key == "gap_floor") cfg.scf.gap_floor = parse_double(key, value);
    else if (key == "tie_tolerance")
      cfg.scf.tie_tolerance = parse_double(key, value);
    else if (key == "initial_guess")
      cfg.scf.initial_guess = value == "core" ? InitialGuess::Core
                                              : InitialGuess::RandomOrthonormal;
    else if (key == "residual_threshold")
      cfg.scf.residual_threshold = parse_double(key, value);
    else if (key == "theta_tolerance")
      cfg.scf.theta_tolerance = parse_double(key, value);
    else if (key == "oscillation_floor")
      cfg.scf.oscillation_floor = parse_double(key, value);
    else if (key == "homo_threshold")
      cfg.scf.homo_threshold = parse_double(key, value);
    else if (key == "seed") cfg.scf.seed = parse_u64(key, value);
    else if (key == "checks") {
      for (const std::string& name : split(value, ',')) {
        if (name == "descent") cfg.diagnostics.descent = true;
        else if (name == "wpbound") cfg.diagnostics.wpbound = true;
        else if (name == "series") cfg.diagnostics.series = true;
        else if (name == "theorem1") cfg.diagnostics.theorem1 = true;
        else if (name == "lojasiewicz") cfg.diagnostics.lojasiewicz = true;
        else if (name == "monitored") cfg.diagnostics.monitored = true;
      }
    } else if (key == "ubound_samples")
      cfg.diagnostics.ubound_samples = static_cast<int>(parse_long(key, value));
    else if (key == "lojasiewicz_tail")
      cfg.diagnostics.lojasiewicz_tail = parse_double(key, value);
    else if (key == "trace") cfg.trace_name = value;
    else if (key == "report") cfg.report_name = value;
    else throw ConfigError("unknown echo key " + key);
  }
  return cfg;
}

BasisContext build_backend(const RunConfig& cfg) {
  if (cfg.backend == "gaussian") {
    BasisLibrary lib = load_basis_file(cfg.basis_file);
    return build_gaussian_backend(cfg.geometry,
                                  assign_contractions(cfg.geometry, lib),
                                  cfg.kinetic_factor);
  }
  if (cfg.backend == "grid1d")
    return build_grid1d_backend(cfg.half_width, cfg.points, cfg.softening,
                                cfg.geometry, cfg.kinetic_factor);
  throw ConfigError("backend.type: must be gaussian or grid1d");
}

std::uint64_t basis_fingerprint(const BasisContext& ctx) {
  const Mat& s = ctx.overlap.mat();
  const Mat& h = ctx.core.mat();
  std::uint64_t f = fnv1a64(s.data(), sizeof(double) * s.size());
  return fnv1a64(h.data(), sizeof(double) * h.size(), f);
}

std::string render_trace(const ScfTrace& trace, const RunConfig& cfg,
                         const BasisContext& ctx) {
  const int n = trace.electron_count;
  const bool moments = trace.backend_tag == "grid1d";
  std::string out;
  out += "# scflab trace v1\n";
  out += "# config: " + canonical_echo(cfg) + "\n";
  out += "# backend: " + trace.backend_tag + " dim=" + std::to_string(ctx.dim) +
         " electrons=" + std::to_string(n) + "\n";
  char fp[24];
  std::snprintf(fp, sizeof fp, "%016llx",
                static_cast<unsigned long long>(basis_fingerprint(ctx)));
  out += std::string("# fingerprint: ") + fp + "\n";
  out += "# stop_reason: " + to_string(trace.stop_reason) + "\n";
  out += "# verdict: " + trace.verdict + "\n";
  for (const std::string& flag : trace.flags) out += "# flag: " + flag + "\n";

  out += "k";
  for (int i = 1; i <= n; ++i) out += ",e" + std::to_string(i);
  out += ",gap,pair_energy,hf_energy,step_distance,alpha,residual_norm,aligned_step";
  for (int i = 1; i <= n; ++i) out += ",kin" + std::to_string(i);
  if (moments)
    for (int i = 1; i <= n; ++i) out += ",mom" + std::to_string(i);
  out += "\n";

  for (const ScfRecord& row : trace.rows) {
    out += std::to_string(row.k);
    for (int i = 0; i < n; ++i) out += "," + format_g17(row.orbital_energies(i));
    out += "," + format_g17(row.gap);
    out += "," + format_g17(row.pair_energy);
    out += "," + format_g17(row.hf_energy);
    out += "," + format_g17(row.step_distance);
    out += "," + format_g17(row.alpha);
    out += "," + format_g17(row.residual_norm);
    out += "," + format_g17(row.aligned_step);
    for (int i = 0; i < n; ++i) out += "," + format_g17(row.kinetic_norms(i));
    if (moments)
      for (int i = 0; i < n; ++i) out += "," + format_g17(row.moment_norms(i));
    out += "\n";
  }
  return out;
}

ScfTrace parse_trace(const std::string& text, TraceHeader* header) {
  ScfTrace trace;
  TraceHeader hdr;
  std::istringstream in(text);
  std::string line;
  bool saw_columns = false;
  size_t n_cols = 0;
  int n = 0;
  bool moments = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const std::string body = line.substr(2);
      if (body.rfind("scflab trace", 0) == 0) hdr.version = body;
      else if (body.rfind("config: ", 0) == 0) hdr.config_echo = body.substr(8);
      else if (body.rfind("backend: ", 0) == 0) {
        std::istringstream ss(body.substr(9));
        std::string tag, dim_kv, n_kv;
        ss >> tag >> dim_kv >> n_kv;
        hdr.backend_tag = tag;
        trace.backend_tag = tag;
        if (dim_kv.rfind("dim=", 0) == 0)
          hdr.dim = static_cast<int>(parse_long("dim", dim_kv.substr(4)));
        if (n_kv.rfind("electrons=", 0) == 0) {
          hdr.electron_count =
              static_cast<int>(parse_long("electrons", n_kv.substr(10)));
          trace.electron_count = hdr.electron_count;
        }
      } else if (body.rfind("fingerprint: ", 0) == 0)
        hdr.fingerprint = body.substr(13);
      else if (body.rfind("stop_reason: ", 0) == 0) {
        hdr.stop_reason = body.substr(13);
        if (hdr.stop_reason == "alpha-converged")
          trace.stop_reason = StopReason::AlphaConverged;
        else if (hdr.stop_reason == "fixed-point-locked")
          trace.stop_reason = StopReason::FixedPointLocked;
        else
          trace.stop_reason = StopReason::MaxIterations;
      } else if (body.rfind("verdict: ", 0) == 0) {
        hdr.verdict = body.substr(9);
        trace.verdict = hdr.verdict;
      } else if (body.rfind("flag: ", 0) == 0)
        trace.flags.push_back(body.substr(6));
      else
        throw ConfigError("unknown trace header line: " + line);
      continue;
    }
    if (!saw_columns) {
      if (line.rfind("k,", 0) != 0)
        throw ConfigError("trace: missing column header");
      const auto cols = split(line, ',');
      n_cols = cols.size();
      n = trace.electron_count;
      if (n <= 0) throw ConfigError("trace: missing electron count");
      moments = n_cols == static_cast<size_t>(1 + n + 8 + n + n);
      if (!moments && n_cols != static_cast<size_t>(1 + n + 8 + n))
        throw ConfigError("trace: unexpected column count");
      saw_columns = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != n_cols)
      throw ConfigError("trace: truncated row '" + line + "'");
    ScfRecord row;
    size_t c = 0;
    row.k = static_cast<int>(parse_long("k", cells[c++]));
    row.orbital_energies.resize(n);
    for (int i = 0; i < n; ++i)
      row.orbital_energies(i) = parse_double("e", cells[c++]);
    row.gap = parse_double("gap", cells[c++]);
    row.pair_energy = parse_double("pair_energy", cells[c++]);
    row.hf_energy = parse_double("hf_energy", cells[c++]);
    row.step_distance = parse_double("step_distance", cells[c++]);
    row.alpha = parse_double("alpha", cells[c++]);
    row.residual_norm = parse_double("residual_norm", cells[c++]);
    row.aligned_step = parse_double("aligned_step", cells[c++]);
    row.kinetic_norms.resize(n);
    for (int i = 0; i < n; ++i)
      row.kinetic_norms(i) = parse_double("kin", cells[c++]);
    if (moments) {
      row.moment_norms.resize(n);
      for (int i = 0; i < n; ++i)
        row.moment_norms(i) = parse_double("mom", cells[c++]);
    }
    if (row.k != static_cast<int>(trace.rows.size()))
      throw ConfigError("trace: iteration indices not contiguous");
    trace.rows.push_back(std::move(row));
  }
  if (!saw_columns) throw ConfigError("trace: no data");
  if (header) *header = hdr;
  return trace;
}

}  // namespace scflab
