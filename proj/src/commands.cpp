#include "scflab/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace scflab {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json check_to_json(const LemmaCheckResult& r) {
  ordered_json j;
  j["lemma_id"] = to_string(r.lemma_id);
  j["passed"] = r.passed;
  j["worst_margin"] = r.worst_margin;
  j["location"] = r.location;
  j["details"] = r.details;
  return j;
}

std::vector<LemmaCheckResult> run_checks(const ScfTrace& trace,
                                         const RunConfig& cfg,
                                         const BasisContext* ctx,
                                         LojasiewiczFit* fit_out) {
  std::vector<LemmaCheckResult> checks;
  const DiagnosticsConfig& d = cfg.diagnostics;
  if (d.descent) checks.push_back(check_descent(trace));
  if (d.wpbound) checks.push_back(check_wpbound(trace));
  if (d.series) {
    std::vector<double> alphas = trace_alphas(trace);
    checks.push_back(check_series(alphas));
  }
  if (d.theorem1 && trace.verdict == "converged-hf-solution")
    checks.push_back(check_theorem1_cauchy(trace));
  if (d.lojasiewicz) {
    if (trace.verdict == "converged-hf-solution") {
      checks.push_back(check_lojasiewicz(trace, d.lojasiewicz_tail));
      if (fit_out) *fit_out = probe_lojasiewicz(trace, d.lojasiewicz_tail);
    } else {
      LemmaCheckResult r;
      r.lemma_id = LemmaId::Lojasiewicz;
      r.details = "not applicable: verdict " + trace.verdict;
      checks.push_back(r);
    }
  }
  if (d.monitored)
    for (LemmaCheckResult& r : check_monitored_bounds(trace, ctx))
      checks.push_back(std::move(r));
  if (d.ubound_samples > 0)
    checks.push_back(
        check_ubound(d.ubound_samples, 2, 20, 1, 5, cfg.scf.seed));
  return checks;
}

void print_checks(const std::vector<LemmaCheckResult>& checks, bool quiet) {
  if (quiet) return;
  for (const LemmaCheckResult& r : checks)
    std::printf("%-6s %-16s %s\n", r.passed ? "PASS" : "FAIL",
                to_string(r.lemma_id).c_str(), r.details.c_str());
}

ordered_json report_json(const ScfTrace& trace, const FixedPointReport& report,
                         const RunConfig& cfg, const BasisContext& ctx,
                         const std::vector<LemmaCheckResult>& checks,
                         const LojasiewiczFit& fit) {
  ordered_json j;
  j["verdict"] = to_string(report.verdict);

  ordered_json energies;
  energies["final_hf"] =
      trace.rows.empty() ? 0.0 : trace.rows.back().hf_energy;
  energies["final_pair"] =
      trace.rows.empty() ? 0.0 : trace.rows.back().pair_energy;
  energies["mu"] = fit.mu_estimate;
  std::vector<double> canonical(
      report.canonical_energies.values.data(),
      report.canonical_energies.values.data() +
          report.canonical_energies.values.size());
  energies["canonical"] = canonical;
  energies["limit_gap"] = report.limit_gap;
  j["energies"] = energies;

  ordered_json checks_json = ordered_json::array();
  for (const LemmaCheckResult& r : checks) checks_json.push_back(check_to_json(r));
  j["checks"] = checks_json;

  ordered_json lj;
  lj["mu"] = fit.mu_estimate;
  lj["kappa"] = fit.kappa_estimate;
  lj["ratios"] = fit.ratios;
  lj["window"] = {fit.window_start, fit.window_end};
  lj["max_over_median"] = fit.max_over_median;
  lj["note"] = fit.note;
  j["lojasiewicz"] = lj;

  ordered_json meta;
  meta["config"] = canonical_echo(cfg);
  char fp[24];
  std::snprintf(fp, sizeof fp, "%016llx",
                static_cast<unsigned long long>(basis_fingerprint(ctx)));
  meta["fingerprint"] = fp;
  meta["stop_reason"] = to_string(trace.stop_reason);
  meta["iterations"] = trace.rows.size();
  meta["flags"] = trace.flags;
  meta["unitary_relation_defect"] = report.unitary_relation_defect;
  meta["canonical_alignment_defect"] = report.canonical_alignment_defect;
  meta["hf_residual"] = report.hf_residual;
  meta["classification"] = report.details;
  meta["residual_norm_convention"] =
      "function blocks weighted 2, scalar blocks weighted 1";
  j["metadata"] = meta;
  return j;
}

int verdict_exit_code(Verdict v) {
  switch (v) {
    case Verdict::ConvergedHfSolution: return 0;
    case Verdict::TwoCycleOscillation: return 2;
    case Verdict::Undetermined: return 3;
  }
  return 3;
}

}  // namespace

int cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir,
            bool quiet) {
  try {
    std::filesystem::create_directories(out_dir);
    BasisContext ctx = build_backend(cfg);
    auto [trace, report] = run_scf(ctx, cfg.scf);

    LojasiewiczFit fit;
    std::vector<LemmaCheckResult> checks = run_checks(trace, cfg, &ctx, &fit);

    write_file_atomic(out_dir / cfg.trace_name, render_trace(trace, cfg, ctx));
    write_file_atomic(
        out_dir / cfg.report_name,
        report_json(trace, report, cfg, ctx, checks, fit).dump(2) + "\n");

    print_checks(checks, quiet);
    if (!quiet) {
      std::printf("verdict: %s after %zu iterations (%s)\n",
                  to_string(report.verdict).c_str(), trace.rows.size(),
                  to_string(trace.stop_reason).c_str());
      std::printf("final hf energy: %s\n",
                  format_g17(trace.rows.back().hf_energy).c_str());
    }
    return verdict_exit_code(report.verdict);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int cmd_scan(const RunConfig& base, const std::string& axis,
             const std::vector<double>& values,
             const std::filesystem::path& out_dir, bool quiet) {
  static const char* kScannable[] = {"separation", "softening", "half_width",
                                     "kinetic_factor",
                                     "convergence_threshold"};
  try {
    bool known = false;
    for (const char* name : kScannable)
      if (axis == name) known = true;
    if (!known) {
      std::string list;
      for (const char* name : kScannable) {
        if (!list.empty()) list += ", ";
        list += name;
      }
      throw ConfigError("scan axis '" + axis +
                        "' unknown; scannable fields: " + list);
    }
    if (values.empty()) throw ConfigError("scan: empty value list");
    if (axis == "separation" && base.geometry.nuclei.size() < 2)
      throw ConfigError("scan separation: needs at least two nuclei");
    if ((axis == "softening" || axis == "half_width") &&
        base.backend != "grid1d")
      throw ConfigError("scan " + axis + ": grid1d backend only");

    std::filesystem::create_directories(out_dir);
    std::string csv =
        "value,verdict,iterations,final_hf,final_pair,alpha_tail,step_tail\n";
    const std::filesystem::path csv_path = out_dir / ("scan_" + axis + ".csv");
    for (double v : values) {
      RunConfig cfg = base;
      if (axis == "separation") {
        const bool grid = cfg.backend == "grid1d";
        Eigen::Vector3d dir =
            grid ? Eigen::Vector3d(1, 0, 0) : Eigen::Vector3d(0, 0, 1);
        cfg.geometry.nuclei[0].position = -0.5 * v * dir;
        cfg.geometry.nuclei[1].position = 0.5 * v * dir;
      } else if (axis == "softening") {
        cfg.softening = v;
      } else if (axis == "half_width") {
        cfg.half_width = v;
      } else if (axis == "kinetic_factor") {
        cfg.kinetic_factor = v;
      } else {
        cfg.scf.convergence_threshold = v;
      }
      BasisContext ctx = build_backend(cfg);
      auto [trace, report] = run_scf(ctx, cfg.scf);
      const ScfRecord& tail = trace.rows.back();
      csv += format_g17(v) + "," + to_string(report.verdict) + "," +
             std::to_string(trace.rows.size()) + "," +
             format_g17(tail.hf_energy) + "," + format_g17(tail.pair_energy) +
             "," + format_g17(tail.alpha) + "," +
             format_g17(tail.step_distance) + "\n";
      write_file_atomic(csv_path, csv);  // keep partial scans consistent
      if (!quiet)
        std::printf("%s=%-12g %-24s iters=%zu E=%.10f alpha=%.3e step=%.3e\n",
                    axis.c_str(), v, to_string(report.verdict).c_str(),
                    trace.rows.size(), tail.hf_energy, tail.alpha,
                    tail.step_distance);
    }
    if (!quiet) std::printf("scan table: %s\n", csv_path.string().c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int cmd_check(const std::filesystem::path& trace_path,
              const std::filesystem::path& out_dir, bool quiet) {
  try {
    std::ifstream in(trace_path, std::ios::binary);
    if (!in)
      throw ConfigError("cannot open trace: " + trace_path.string());
    std::ostringstream ss;
    ss << in.rdbuf();

    TraceHeader header;
    ScfTrace trace = parse_trace(ss.str(), &header);
    RunConfig cfg = parse_echo(header.config_echo);
    BasisContext ctx = build_backend(cfg);

    char fp[24];
    std::snprintf(fp, sizeof fp, "%016llx",
                  static_cast<unsigned long long>(basis_fingerprint(ctx)));
    if (header.fingerprint != fp)
      throw ConfigError("stale trace: basis fingerprint mismatch (header " +
                        header.fingerprint + ", rebuilt " + fp + ")");

    LojasiewiczFit fit;
    std::vector<LemmaCheckResult> checks = run_checks(trace, cfg, &ctx, &fit);
    print_checks(checks, quiet);

    ordered_json j;
    j["trace"] = trace_path.string();
    j["verdict"] = header.verdict;
    ordered_json checks_json = ordered_json::array();
    bool all_passed = true;
    for (const LemmaCheckResult& r : checks) {
      checks_json.push_back(check_to_json(r));
      all_passed = all_passed && r.passed;
    }
    j["checks"] = checks_json;
    ordered_json lj;
    lj["mu"] = fit.mu_estimate;
    lj["kappa"] = fit.kappa_estimate;
    lj["ratios"] = fit.ratios;
    lj["window"] = {fit.window_start, fit.window_end};
    lj["max_over_median"] = fit.max_over_median;
    lj["note"] = fit.note;
    j["lojasiewicz"] = lj;

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path report_path =
        out_dir / (trace_path.stem().string() + "_check.json");
    write_file_atomic(report_path, j.dump(2) + "\n");
    if (!quiet)
      std::printf("%s: %s\n", all_passed ? "all checks passed" : "check failed",
                  report_path.string().c_str());
    return all_passed ? 0 : 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace scflab
