#include "scflab/diagnostics.hpp"

#include "scflab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace scflab {

std::string to_string(LemmaId id) {
  switch (id) {
    case LemmaId::Descent: return "descent";
    case LemmaId::Wpbound: return "wpbound";
    case LemmaId::Ubound: return "ubound";
    case LemmaId::Gammabound: return "gammabound";
    case LemmaId::Hbound: return "hbound";
    case LemmaId::Expbound: return "expbound";
    case LemmaId::Series: return "series";
    case LemmaId::Lojasiewicz: return "lojasiewicz";
    case LemmaId::Theorem1Cauchy: return "theorem1-cauchy";
  }
  return "descent";
}

namespace {

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

bool has_flag(const ScfTrace& trace, const std::string& needle) {
  for (const std::string& f : trace.flags)
    if (f.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

LemmaCheckResult check_descent(const ScfTrace& trace) {
  LemmaCheckResult r;
  r.lemma_id = LemmaId::Descent;
  if (trace.rows.size() < 2) {
    r.details = "insufficient data";
    return r;
  }
  const double tol =
      1e-12 * std::max(1.0, std::abs(trace.rows.front().pair_energy));
  r.worst_margin = std::numeric_limits<double>::infinity();
  for (size_t k = 1; k < trace.rows.size(); ++k) {
    const double slack =
        trace.rows[k - 1].pair_energy - trace.rows[k].pair_energy;
    if (slack < r.worst_margin) {
      r.worst_margin = slack;
      r.location = static_cast<long>(k);
    }
  }
  r.passed = r.worst_margin >= -tol;
  r.details = "worst pair-energy increase " + fmt("%.3e", -r.worst_margin) +
              " at k=" + std::to_string(r.location);
  return r;
}

LemmaCheckResult check_wpbound(const ScfTrace& trace) {
  LemmaCheckResult r;
  r.lemma_id = LemmaId::Wpbound;
  if (trace.rows.size() < 3) {
    r.details = "insufficient data";
    return r;
  }
  double gamma = std::numeric_limits<double>::infinity();
  for (const ScfRecord& row : trace.rows) gamma = std::min(gamma, row.gap);
  r.worst_margin = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k + 2 < trace.rows.size(); ++k) {
    const double drop =
        trace.rows[k].pair_energy - trace.rows[k + 1].pair_energy;
    const double two_step = trace.rows[k + 1].alpha;  // ||D^{k+2} - D^k||
    const double slack = drop - 0.5 * gamma * two_step * two_step;
    if (slack < r.worst_margin) {
      r.worst_margin = slack;
      r.location = static_cast<long>(k);
    }
  }
  r.passed = r.worst_margin >= -1e-10;
  r.details = "gamma_meas=" + fmt("%.6e", gamma) + ", worst slack " +
              fmt("%.3e", r.worst_margin) + " at k=" +
              std::to_string(r.location);
  if (has_flag(trace, "gap-below-floor"))
    r.details += "; gap-below-floor flags present, gamma_meas unreliable";
  return r;
}

LemmaCheckResult check_ubound(int samples, int m_min, int m_max, int n_min,
                              int n_max, std::uint64_t seed) {
  if (samples < 1) throw InvalidInput("check_ubound: samples must be >= 1");
  Rng rng(seed, "ubound");
  LemmaCheckResult r;
  r.lemma_id = LemmaId::Ubound;
  r.worst_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const long m = rng.uniform_int(std::max(2, m_min), m_max);
    const long n = rng.uniform_int(n_min, std::min<long>(n_max, m));
    OrbitalSet phi(rng.orthonormal(m, n));
    OrbitalSet phi2(rng.orthonormal(m, n));
    AlignmentPair pair = align_orbitals(phi, phi2);
    const Mat diff = phi.coeffs() * pair.a.transpose() -
                     phi2.coeffs() * pair.a2.transpose();
    const double aligned2 = diff.squaredNorm();
    const double identity_gap =
        std::abs(aligned2 - 2.0 * (n - pair.singular.sum()));
    const double hs = hs_distance(phi.coeffs() * phi.coeffs().transpose(),
                                  phi2.coeffs() * phi2.coeffs().transpose());
    const double inequality = hs - std::sqrt(aligned2);
    const Mat b = orbital_overlap(phi, phi2);
    const double overlap_gap =
        std::abs(hs * hs - (2.0 * n - 2.0 * b.squaredNorm()));
    const double margin =
        std::min(inequality, -std::max(identity_gap, overlap_gap));
    // margin mixes the one-sided inequality with two exact identities; all
    // must clear -1e-10
    if (margin < r.worst_margin) {
      r.worst_margin = margin;
      r.location = s;
    }
  }
  r.passed = r.worst_margin >= -1e-10;
  r.details = std::to_string(samples) + " samples, worst margin " +
              fmt("%.3e", r.worst_margin) + " at sample " +
              std::to_string(r.location);
  return r;
}

LojasiewiczFit probe_lojasiewicz(const ScfTrace& trace, double tail_fraction) {
  if (trace.rows.size() < 2)
    throw InvalidInput("probe_lojasiewicz: insufficient data");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw InvalidInput("probe_lojasiewicz: tail_fraction must be in (0,1]");

  LojasiewiczFit fit;
  fit.mu_estimate = trace.rows.back().pair_energy;
  const double energy_floor = 1e-13 * std::max(1.0, std::abs(fit.mu_estimate));

  std::vector<size_t> candidates;
  for (size_t k = 0; k + 1 < trace.rows.size(); ++k) {
    const double offset = std::abs(trace.rows[k].pair_energy - fit.mu_estimate);
    if (trace.rows[k].residual_norm < 1e-14) continue;
    if (offset < energy_floor) continue;  // below round-off, ratio meaningless
    candidates.push_back(k);
  }
  if (candidates.empty()) {
    fit.note = "all residuals or energy offsets at round-off; kappa set to 0";
    return fit;
  }
  const size_t take = std::max<size_t>(
      1, static_cast<size_t>(
             std::ceil(tail_fraction * static_cast<double>(candidates.size()))));
  const size_t begin = candidates.size() - take;
  fit.window_start = static_cast<long>(candidates[begin]);
  fit.window_end = static_cast<long>(candidates.back());
  for (size_t i = begin; i < candidates.size(); ++i) {
    const ScfRecord& row = trace.rows[candidates[i]];
    fit.ratios.push_back(std::sqrt(std::abs(row.pair_energy - fit.mu_estimate)) /
                         row.residual_norm);
  }
  std::vector<double> sorted = fit.ratios;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  fit.kappa_estimate = sorted.back();
  fit.max_over_median =
      median > 0.0 ? fit.kappa_estimate / median
                   : std::numeric_limits<double>::infinity();
  return fit;
}

LemmaCheckResult check_lojasiewicz(const ScfTrace& trace,
                                   double tail_fraction) {
  LemmaCheckResult r;
  r.lemma_id = LemmaId::Lojasiewicz;
  LojasiewiczFit fit = probe_lojasiewicz(trace, tail_fraction);
  if (fit.ratios.empty()) {
    r.passed = true;
    r.details = fit.note;
    return r;
  }
  bool finite = true;
  for (double x : fit.ratios)
    if (!std::isfinite(x)) finite = false;
  r.passed = finite && fit.max_over_median <= 10.0;
  r.worst_margin = 10.0 - fit.max_over_median;
  r.location = fit.window_end;
  r.details = "kappa=" + fmt("%.6e", fit.kappa_estimate) +
              " max/median=" + fmt("%.3f", fit.max_over_median) + " window=[" +
              std::to_string(fit.window_start) + "," +
              std::to_string(fit.window_end) + "] ratios=" +
              std::to_string(fit.ratios.size());
  return r;
}

std::vector<double> trace_alphas(const ScfTrace& trace) {
  std::vector<double> out;
  for (size_t k = 1; k < trace.rows.size(); ++k) {
    if (trace.rows[k].alpha <= 0.0) break;
    out.push_back(trace.rows[k].alpha);
  }
  return out;
}

LemmaCheckResult check_series(const std::vector<double>& alphas) {
  LemmaCheckResult r;
  r.lemma_id = LemmaId::Series;
  for (double a : alphas)
    if (!(a > 0.0))
      throw InvalidInput("check_series: all terms must be positive");
  if (alphas.size() < 2) {
    r.details = "insufficient data";
    return r;
  }
  const size_t last_k = alphas.size() - 1;  // ratio series needs a_{k+1}
  std::vector<double> plain(last_k), ratio(last_k);
  double s = alphas[0], q = 0.0;
  r.worst_margin = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < last_k; ++k) {
    q += alphas[k + 1] * alphas[k + 1] / alphas[k];
    if (k > 0) s += alphas[k];
    // partial sum S_K includes alpha_1..alpha_K with K = k+1 terms
    const double sk = s;
    const double margin =
        std::sqrt(alphas[0]) + std::sqrt(q) - std::sqrt(sk) + 1e-12;
    if (margin < r.worst_margin) {
      r.worst_margin = margin;
      r.location = static_cast<long>(k + 1);
    }
    plain[k] = sk;
    ratio[k] = q;
  }
  bool bound_ok = r.worst_margin >= 0.0;

  // flatness over the last quarter of partial sums
  const size_t quarter = std::max<size_t>(1, last_k / 4);
  double ratio_inc = 0.0, plain_inc = 0.0;
  for (size_t k = last_k - quarter; k < last_k; ++k) {
    if (k == 0) continue;
    ratio_inc = std::max(ratio_inc, ratio[k] - ratio[k - 1]);
    plain_inc = std::max(plain_inc, plain[k] - plain[k - 1]);
  }
  const bool ratio_flat = ratio_inc < 1e-12;
  const bool plain_flat = plain_inc < 1e-12;
  if (ratio_flat) {
    r.passed = bound_ok && plain_flat;
    r.details = "ratio series Cauchy-flat; plain series " +
                std::string(plain_flat ? "flat" : "NOT flat");
  } else {
    r.passed = bound_ok;
    r.details = "hypothesis not satisfied, no claim";
  }
  r.details += "; partial-sum bound worst margin " + fmt("%.3e", r.worst_margin);
  return r;
}

std::vector<LemmaCheckResult> check_monitored_bounds(const ScfTrace& trace,
                                                     const BasisContext* ctx) {
  std::vector<LemmaCheckResult> out;

  auto bounded = [&](LemmaId id, auto getter, const char* label) {
    LemmaCheckResult r;
    r.lemma_id = id;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    bool any = false;
    for (const ScfRecord& row : trace.rows) {
      const Vec& v = getter(row);
      for (Index i = 0; i < v.size(); ++i) {
        any = true;
        lo = std::min(lo, v(i));
        hi = std::max(hi, v(i));
      }
    }
    if (!any) {
      r.details = std::string(label) + ": not applicable";
      return r;
    }
    const double ratio = lo > 0.0 ? hi / lo
                                  : std::numeric_limits<double>::infinity();
    r.passed = std::isfinite(hi) && ratio <= 100.0;
    r.worst_margin = 100.0 - ratio;
    r.details = std::string(label) + ": max=" + fmt("%.6e", hi) +
                " min=" + fmt("%.6e", lo) + " max/min=" + fmt("%.3f", ratio);
    return r;
  };

  out.push_back(bounded(
      LemmaId::Hbound,
      [](const ScfRecord& row) -> const Vec& { return row.kinetic_norms; },
      "kinetic norms"));
  out.push_back(bounded(
      LemmaId::Expbound,
      [](const ScfRecord& row) -> const Vec& { return row.moment_norms; },
      "moment norms"));

  // orbital-energy level: reported, never failed; a finite basis has no
  // essential spectrum to pin the level against
  LemmaCheckResult gb;
  gb.lemma_id = LemmaId::Gammabound;
  double worst = -std::numeric_limits<double>::infinity();
  long where = -1;
  int violations = 0;
  for (size_t k = 1; k < trace.rows.size(); ++k) {
    const Vec& e = trace.rows[k].orbital_energies;
    if (e.size() == 0) continue;
    const double homo = e(e.size() - 1);
    if (homo > worst) {
      worst = homo;
      where = static_cast<long>(k);
    }
    if (homo > 0.0) ++violations;
  }
  gb.passed = true;
  gb.worst_margin = -worst;
  gb.location = where;
  gb.details = "monitor only: max homo level " + fmt("%.6e", worst) + " (" +
               std::to_string(violations) + " rows above 0)";
  out.push_back(gb);

  if (ctx && ctx->backend_tag != trace.backend_tag)
    out.back().details += "; context backend mismatch";
  return out;
}

LemmaCheckResult check_theorem1_cauchy(const ScfTrace& trace) {
  LemmaCheckResult r;
  r.lemma_id = LemmaId::Theorem1Cauchy;
  if (trace.rows.size() < 2) {
    r.details = "insufficient data";
    return r;
  }
  const ScfRecord& final_row = trace.rows.back();
  const bool alpha_ok = final_row.alpha < 1e-9;
  const bool aligned_ok = final_row.aligned_step < 1e-6;

  // parity subsequences over the last up-to-10 rows with alpha defined
  bool cauchy_ok = true;
  long bad_k = -1;
  const size_t first = trace.rows.size() > 10 ? trace.rows.size() - 10 : 1;
  for (size_t k = first + 2; k < trace.rows.size(); ++k) {
    if (trace.rows[k].alpha > trace.rows[k - 2].alpha + 1e-12) {
      cauchy_ok = false;
      bad_k = static_cast<long>(k);
    }
  }
  r.passed = alpha_ok && aligned_ok && cauchy_ok;
  r.worst_margin = std::min(1e-9 - final_row.alpha,
                            1e-6 - final_row.aligned_step);
  r.location = bad_k >= 0 ? bad_k : static_cast<long>(trace.rows.size()) - 1;
  r.details = "final alpha=" + fmt("%.3e", final_row.alpha) +
              " final aligned H-step=" + fmt("%.3e", final_row.aligned_step) +
              (cauchy_ok ? "; parity tails shrink"
                         : "; parity tail grows at k=" + std::to_string(bad_k));
  return r;
}

}  // namespace scflab
