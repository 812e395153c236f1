#include "scflab/diagnostics.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace scflab;

namespace {

ScfTrace converged_grid_trace() {
  BasisContext ctx = testing::grid_context(40);
  ScfConfig cfg;
  cfg.convergence_threshold = 1e-10;
  cfg.max_iterations = 300;
  auto [trace, report] = run_scf(ctx, cfg);
  REQUIRE(report.verdict == Verdict::ConvergedHfSolution);
  return trace;
}

}  // namespace

TEST_CASE("check_descent on runs and synthetic counterexamples") {
  ScfTrace trace = converged_grid_trace();
  CHECK(check_descent(trace).passed);

  ScfTrace broken = trace;
  REQUIRE(broken.rows.size() > 5);
  broken.rows[4].pair_energy = broken.rows[3].pair_energy + 1e-3;
  LemmaCheckResult r = check_descent(broken);
  CHECK(!r.passed);
  CHECK(r.location == 4);

  ScfTrace tiny;
  tiny.rows.resize(1);
  LemmaCheckResult vac = check_descent(tiny);
  CHECK(vac.passed);
  CHECK(vac.details == "insufficient data");
}

TEST_CASE("check_wpbound on gaussian grid and non-interacting runs") {
  {
    BasisContext ctx = testing::h2_context(1.4);
    ScfConfig cfg;
    auto [trace, report] = run_scf(ctx, cfg);
    CHECK(check_wpbound(trace).passed);
  }
  {
    ScfTrace trace = converged_grid_trace();
    CHECK(check_wpbound(trace).passed);
  }
  {
    BasisContext ctx =
        testing::without_interaction(testing::grid_context(40));
    ScfConfig cfg;
    auto [trace, report] = run_scf(ctx, cfg);
    LemmaCheckResult r = check_wpbound(trace);
    CHECK(r.passed);
  }
}

TEST_CASE("check_ubound samples pass with a fixed seed") {
  LemmaCheckResult r = check_ubound(1000, 2, 20, 1, 5, 42);
  CHECK(r.passed);
  CHECK(r.worst_margin >= -1e-10);
  // determinism
  LemmaCheckResult r2 = check_ubound(1000, 2, 20, 1, 5, 42);
  CHECK(r.worst_margin == r2.worst_margin);
  CHECK(r.location == r2.location);
}

TEST_CASE("probe_lojasiewicz on a run with a clean tail") {
  ScfTrace trace = converged_grid_trace();
  LojasiewiczFit fit = probe_lojasiewicz(trace, 0.25);
  REQUIRE(!fit.ratios.empty());
  for (double x : fit.ratios) CHECK(std::isfinite(x));
  CHECK(fit.max_over_median <= 10.0);
  CHECK(check_lojasiewicz(trace, 0.25).passed);

  // ratios depend on energy offsets only
  ScfTrace shifted = trace;
  for (ScfRecord& row : shifted.rows) row.pair_energy += 5.0;
  LojasiewiczFit fit2 = probe_lojasiewicz(shifted, 0.25);
  REQUIRE(fit.ratios.size() == fit2.ratios.size());
  for (size_t i = 0; i < fit.ratios.size(); ++i)
    CHECK(fit.ratios[i] == doctest::Approx(fit2.ratios[i]).epsilon(1e-9));
}

TEST_CASE("probe_lojasiewicz degenerate and synthetic cases") {
  BasisContext ctx = testing::without_interaction(testing::grid_context(40));
  ScfConfig cfg;
  auto [trace, report] = run_scf(ctx, cfg);
  LojasiewiczFit fit = probe_lojasiewicz(trace, 0.25);
  CHECK(fit.ratios.empty());
  CHECK(fit.kappa_estimate == 0.0);
  CHECK(!fit.note.empty());

  // constructed equality case: |E_k - mu| = 4^{-k}, ||F_k|| = 2^{-k}; with
  // mu = 0 the offsets and square roots are exact powers of two
  ScfTrace synthetic;
  synthetic.electron_count = 1;
  synthetic.backend_tag = "gaussian";
  const double mu = 0.0;
  for (int k = 0; k <= 20; ++k) {
    ScfRecord row;
    row.k = k;
    row.pair_energy = mu + std::pow(4.0, -k);
    row.residual_norm = std::pow(2.0, -k);
    synthetic.rows.push_back(row);
  }
  ScfRecord final_row;
  final_row.k = 21;
  final_row.pair_energy = mu;  // limit row pins the mu estimate
  final_row.residual_norm = 0.0;
  synthetic.rows.push_back(final_row);

  LojasiewiczFit sfit = probe_lojasiewicz(synthetic, 1.0);
  CHECK(sfit.ratios.size() == 21);
  for (double x : sfit.ratios) CHECK(x == 1.0);
  CHECK(sfit.kappa_estimate == 1.0);

  ScfTrace too_short;
  too_short.rows.resize(1);
  CHECK_THROWS_AS(probe_lojasiewicz(too_short, 0.25), InvalidInput);
}

TEST_CASE("check_series geometric, harmonic and run sequences") {
  std::vector<double> geometric;
  for (int k = 1; k <= 60; ++k) geometric.push_back(std::pow(2.0, -k));
  LemmaCheckResult g = check_series(geometric);
  CHECK(g.passed);
  CHECK(g.worst_margin >= 0.0);

  std::vector<double> harmonic;
  for (int k = 1; k <= 2000; ++k) harmonic.push_back(1.0 / k);
  LemmaCheckResult h = check_series(harmonic);
  CHECK(h.passed);
  CHECK(h.details.find("hypothesis not satisfied") != std::string::npos);

  ScfTrace trace = converged_grid_trace();
  std::vector<double> alphas = trace_alphas(trace);
  REQUIRE(alphas.size() >= 4);
  LemmaCheckResult r = check_series(alphas);
  CHECK(r.worst_margin >= 0.0);

  CHECK_THROWS_AS(check_series({1.0, -0.5}), InvalidInput);
}

TEST_CASE("check_monitored_bounds across backends") {
  {
    BasisContext ctx = testing::grid_context(40);
    ScfConfig cfg;
    auto [trace, report] = run_scf(ctx, cfg);
    std::vector<LemmaCheckResult> rs = check_monitored_bounds(trace, &ctx);
    REQUIRE(rs.size() == 3);
    CHECK(rs[0].lemma_id == LemmaId::Hbound);
    CHECK(rs[0].passed);
    CHECK(rs[1].lemma_id == LemmaId::Expbound);
    CHECK(rs[1].passed);
    CHECK(rs[1].details.find("not applicable") == std::string::npos);
    CHECK(rs[2].lemma_id == LemmaId::Gammabound);
    CHECK(rs[2].passed);  // monitor only
  }
  {
    BasisContext ctx = testing::h2_context(1.4);
    ScfConfig cfg;
    auto [trace, report] = run_scf(ctx, cfg);
    std::vector<LemmaCheckResult> rs = check_monitored_bounds(trace, &ctx);
    CHECK(rs[1].details.find("not applicable") != std::string::npos);
  }
}

TEST_CASE("non-interacting monitors are trivially bounded") {
  BasisContext ctx = testing::without_interaction(testing::grid_context(40));
  ScfConfig cfg;
  auto [trace, report] = run_scf(ctx, cfg);
  std::vector<LemmaCheckResult> rs = check_monitored_bounds(trace, &ctx);
  CHECK(rs[0].passed);
  CHECK(rs[1].passed);
}

TEST_CASE("check_theorem1_cauchy on a converged run") {
  ScfTrace trace = converged_grid_trace();
  LemmaCheckResult r = check_theorem1_cauchy(trace);
  CHECK(r.passed);
}
