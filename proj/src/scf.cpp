#include "scflab/scf.hpp"

#include "scflab/numerics.hpp"
#include "scflab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace scflab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::ConvergedHfSolution: return "converged-hf-solution";
    case Verdict::TwoCycleOscillation: return "two-cycle-oscillation";
    case Verdict::Undetermined: return "undetermined";
  }
  return "undetermined";
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::AlphaConverged: return "alpha-converged";
    case StopReason::FixedPointLocked: return "fixed-point-locked";
    case StopReason::MaxIterations: return "max-iterations";
  }
  return "max-iterations";
}

namespace {

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

void fix_signs(Mat& vectors) {
  for (Index c = 0; c < vectors.cols(); ++c) {
    Index best = 0;
    double mag = 0.0;
    for (Index r = 0; r < vectors.rows(); ++r) {
      if (std::abs(vectors(r, c)) > mag) {
        mag = std::abs(vectors(r, c));
        best = r;
      }
    }
    if (vectors(best, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

// Compare magnitude sequences lexicographically; entries closer than 1e-12
// are treated as equal.
bool lex_magnitude_greater(const Vec& v, const Vec& w) {
  for (Index i = 0; i < v.size(); ++i) {
    const double dv = std::abs(v(i));
    const double dw = std::abs(w(i));
    if (std::abs(dv - dw) > 1e-12) return dv > dw;
  }
  return false;
}

struct AufbauSelection {
  Mat c;
  OrbitalEnergies energies;
  bool tie = false;
};

AufbauSelection aufbau_select(const EigDecomposition& eig, int n_occ,
                              double tie_tolerance) {
  const Index m = eig.vectors.rows();
  Mat vectors = eig.vectors;
  fix_signs(vectors);

  std::vector<Index> occupied(static_cast<size_t>(n_occ));
  std::iota(occupied.begin(), occupied.end(), Index{0});
  bool tie = false;
  if (n_occ < m &&
      eig.values(n_occ) - eig.values(n_occ - 1) <= tie_tolerance) {
    tie = true;
    const double fermi = eig.values(n_occ - 1);
    Index lo = n_occ - 1;
    while (lo > 0 && std::abs(eig.values(lo - 1) - fermi) <= tie_tolerance)
      --lo;
    Index hi = n_occ - 1;
    while (hi + 1 < m && std::abs(eig.values(hi + 1) - fermi) <= tie_tolerance)
      ++hi;
    std::vector<Index> group;
    for (Index j = lo; j <= hi; ++j) group.push_back(j);
    std::stable_sort(group.begin(), group.end(), [&](Index i, Index j) {
      return lex_magnitude_greater(vectors.col(i), vectors.col(j));
    });
    group.resize(static_cast<size_t>(n_occ - lo));
    std::stable_sort(group.begin(), group.end(), [&](Index i, Index j) {
      return eig.values(i) < eig.values(j);
    });
    for (Index j = lo; j < n_occ; ++j)
      occupied[static_cast<size_t>(j)] = group[static_cast<size_t>(j - lo)];
  }

  AufbauSelection out;
  out.tie = tie;
  out.c.resize(m, n_occ);
  out.energies.values.resize(n_occ);
  for (int j = 0; j < n_occ; ++j) {
    out.c.col(j) = vectors.col(occupied[static_cast<size_t>(j)]);
    out.energies.values(j) = eig.values(occupied[static_cast<size_t>(j)]);
  }
  out.energies.homo_level = out.energies.values(n_occ - 1);
  out.energies.gap = (n_occ < m)
                         ? eig.values(n_occ) - eig.values(n_occ - 1)
                         : std::numeric_limits<double>::max();
  return out;
}

Vec column_norms_through(const Mat& weight, const Mat& c) {
  Vec out(c.cols());
  for (Index j = 0; j < c.cols(); ++j) {
    const double q = c.col(j).dot(weight * c.col(j));
    out(j) = std::sqrt(std::max(0.0, q));
  }
  return out;
}

double h_norm(const Mat& diff, const Mat& kinetic) {
  return std::sqrt(diff.squaredNorm() + (kinetic * diff).squaredNorm());
}

}  // namespace

ScfStepResult scf_step(const Mat& density, const BasisContext& ctx,
                       const ScfConfig& cfg) {
  const int n = ctx.geometry.electron_count;
  EigDecomposition eig = jacobi_eigh(build_fock(density, ctx));
  AufbauSelection sel = aufbau_select(eig, n, cfg.tie_tolerance);

  ScfStepResult out;
  out.orbitals = OrbitalSet(sel.c);
  out.energies = sel.energies;
  out.density = density_from_orbitals(out.orbitals);
  out.gap_below_floor = sel.energies.gap < cfg.gap_floor;
  out.fermi_tie = sel.tie;
  return out;
}

AlignmentPair align_orbitals(const OrbitalSet& phi, const OrbitalSet& phi2) {
  SvdDecomposition svd = svd_small(orbital_overlap(phi, phi2));
  return {svd.left.transpose(), svd.right.transpose(), svd.singular};
}

Mat alignment_chain_update(const Mat& prev_chain, const Mat& a_plus,
                           const Mat& a_minus, bool* degraded) {
  if (degraded) *degraded = false;
  if (a_plus == a_minus) return prev_chain;
  Mat next = prev_chain * a_plus * a_minus.transpose();
  const Index n = next.rows();
  const double defect =
      (next.transpose() * next - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
  if (defect > 1e-8) {
    if (degraded) *degraded = true;
    return Mat::Identity(n, n);
  }
  return next;
}

AlignmentChain build_alignment_chain(const std::vector<Mat>& coeffs) {
  const int last = static_cast<int>(coeffs.size()) - 1;
  AlignmentChain out;
  out.full.resize(coeffs.size());
  if (last < 2) return out;

  // pair j aligns iterates (j, j-2); a_minus[j] is the far-side matrix of
  // the pair (j+2, j)
  std::vector<Mat> a_plus(coeffs.size());
  std::vector<Mat> a_minus(coeffs.size());
  for (int j = 2; j <= last; ++j) {
    AlignmentPair pair =
        align_orbitals(OrbitalSet(coeffs[static_cast<size_t>(j)]),
                       OrbitalSet(coeffs[static_cast<size_t>(j) - 2]));
    a_plus[static_cast<size_t>(j)] = pair.a;
    a_minus[static_cast<size_t>(j) - 2] = pair.a2;
  }

  const Index n = coeffs.front().cols();
  std::vector<Mat> chain(coeffs.size());
  for (int j = 0; j <= last - 2; ++j) {
    if (j <= 1) {
      chain[static_cast<size_t>(j)] = Mat::Identity(n, n);
    } else {
      bool degraded = false;
      chain[static_cast<size_t>(j)] = alignment_chain_update(
          chain[static_cast<size_t>(j) - 2], a_plus[static_cast<size_t>(j)],
          a_minus[static_cast<size_t>(j)], &degraded);
      if (degraded)
        out.flags.push_back("k=" + std::to_string(j) + " chain-reset");
    }
    out.full[static_cast<size_t>(j)] =
        chain[static_cast<size_t>(j)] * a_minus[static_cast<size_t>(j)];
  }
  return out;
}

FixedPointReport classify_fixed_point(const OrbitalSet& even,
                                      const OrbitalSet& odd,
                                      const BasisContext& ctx,
                                      const ScfConfig& cfg) {
  if (even.count() != odd.count())
    throw InvalidOrbitals("classify_fixed_point: orbital counts differ");
  const int n = static_cast<int>(even.count());

  FixedPointReport rep;
  rep.even_limit = even;
  rep.odd_limit = odd;
  rep.even_density = density_from_orbitals(even);
  rep.odd_density = density_from_orbitals(odd);

  EigDecomposition eig = jacobi_eigh(build_fock(rep.even_density, ctx));
  AufbauSelection sel = aufbau_select(eig, n, cfg.tie_tolerance);
  rep.canonical_orbitals = OrbitalSet(sel.c);
  rep.canonical_energies = sel.energies;
  rep.limit_gap = sel.energies.gap;

  SvdDecomposition theta = svd_small(orbital_overlap(even, odd));
  rep.unitary_relation_defect = 1.0 - theta.singular(n - 1);

  SvdDecomposition canon =
      svd_small(orbital_overlap(rep.canonical_orbitals, odd));
  rep.canonical_alignment_defect = 1.0 - canon.singular(n - 1);

  const Mat d_hat = sel.c * sel.c.transpose();
  const Mat f_hat = build_fock(d_hat, ctx);
  rep.hf_residual =
      (f_hat * sel.c - sel.c * sel.energies.values.asDiagonal()).norm();

  if (rep.unitary_relation_defect <= cfg.theta_tolerance) {
    rep.verdict = rep.hf_residual <= cfg.residual_threshold
                      ? Verdict::ConvergedHfSolution
                      : Verdict::Undetermined;
  } else if (rep.unitary_relation_defect > cfg.oscillation_floor) {
    rep.verdict = Verdict::TwoCycleOscillation;
  } else {
    rep.verdict = Verdict::Undetermined;
  }

  rep.details =
      "theta_defect=" + fmt("%.3e", rep.unitary_relation_defect) +
      " canonical_defect=" + fmt("%.3e", rep.canonical_alignment_defect) +
      " hf_residual=" + fmt("%.3e", rep.hf_residual) +
      " limit_gap=" + fmt("%.3e", rep.limit_gap) +
      " (theta_tolerance=" + fmt("%.1e", cfg.theta_tolerance) +
      ", oscillation_floor=" + fmt("%.1e", cfg.oscillation_floor) +
      ", residual_threshold=" + fmt("%.1e", cfg.residual_threshold) +
      ", tie_tolerance=" + fmt("%.1e", cfg.tie_tolerance) + ")";
  return rep;
}

std::pair<ScfTrace, FixedPointReport> run_scf(const BasisContext& ctx,
                                              const ScfConfig& cfg) {
  const int n_elec = ctx.geometry.electron_count;
  const Index m = ctx.dim;
  if (n_elec < 1 || n_elec > m)
    throw InvalidInput("run_scf: need 1 <= electrons <= basis dimension");
  if (cfg.max_iterations < 2)
    throw InvalidInput("run_scf: max_iterations must be >= 2");
  if (cfg.convergence_threshold <= 0.0 || cfg.gap_floor <= 0.0 ||
      cfg.tie_tolerance <= 0.0)
    throw InvalidInput("run_scf: thresholds must be positive");

  ScfTrace trace;
  trace.electron_count = n_elec;
  trace.backend_tag = ctx.backend_tag;

  // initial orbitals
  Mat c0;
  OrbitalEnergies e0;
  switch (cfg.initial_guess) {
    case InitialGuess::Core: {
      EigDecomposition eig = jacobi_eigh(ctx.core_lowdin);
      AufbauSelection sel = aufbau_select(eig, n_elec, cfg.tie_tolerance);
      c0 = sel.c;
      e0 = sel.energies;
      if (sel.tie) trace.flags.push_back("k=0 guess-fermi-tie-resolved");
      break;
    }
    case InitialGuess::RandomOrthonormal: {
      Rng rng(cfg.seed, "initial-guess");
      c0 = rng.orthonormal(m, n_elec);
      break;
    }
    case InitialGuess::GivenDensity: {
      DensityMatrix given(cfg.given_density, n_elec);
      EigDecomposition eig = jacobi_eigh(SymMatrix(given.mat()));
      c0.resize(m, n_elec);
      for (int j = 0; j < n_elec; ++j) {
        if (std::abs(eig.values(m - 1 - j) - 1.0) > 1e-8)
          throw InvalidInput("run_scf: given density is not a rank-N projector");
        c0.col(j) = eig.vectors.col(m - 1 - j);
      }
      fix_signs(c0);
      break;
    }
  }
  if (cfg.initial_guess != InitialGuess::Core) {
    // no generating eigenproblem; attach sorted Rayleigh quotients of h
    Vec ray(n_elec);
    for (int j = 0; j < n_elec; ++j)
      ray(j) = c0.col(j).dot(ctx.core_lowdin.mat() * c0.col(j));
    std::vector<int> order(static_cast<size_t>(n_elec));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return ray(i) < ray(j); });
    Mat sorted(m, n_elec);
    e0.values.resize(n_elec);
    for (int j = 0; j < n_elec; ++j) {
      sorted.col(j) = c0.col(order[static_cast<size_t>(j)]);
      e0.values(j) = ray(order[static_cast<size_t>(j)]);
    }
    c0 = sorted;
    e0.homo_level = e0.values(n_elec - 1);
    e0.gap = 0.0;
  }

  std::vector<Mat> coeffs{c0};
  std::vector<Mat> densities{c0 * c0.transpose()};
  std::vector<OrbitalEnergies> energies{e0};

  const bool grid = ctx.backend_tag == "grid1d";
  Vec moment_weights;
  if (grid)
    moment_weights =
        (Vec::Ones(ctx.grid_nodes.size()) + ctx.grid_nodes.cwiseAbs2());

  int consecutive_alpha = 0;
  int consecutive_step = 0;
  trace.stop_reason = StopReason::MaxIterations;

  while (true) {
    const int k_from = static_cast<int>(coeffs.size()) - 1;
    ScfStepResult step = scf_step(densities.back(), ctx, cfg);
    coeffs.push_back(step.orbitals.coeffs());
    densities.push_back(step.density.mat());
    energies.push_back(step.energies);
    const int row_k = k_from;  // row for iterate k_from, now that k_from+1 exists

    if (step.gap_below_floor)
      trace.flags.push_back("k=" + std::to_string(row_k) +
                            " gap-below-floor gap=" +
                            fmt("%.6e", step.energies.gap));
    if (step.fermi_tie)
      trace.flags.push_back("k=" + std::to_string(row_k) +
                            " fermi-tie-resolved");
    if (row_k >= 1 &&
        energies[static_cast<size_t>(row_k)].homo_level > cfg.homo_threshold)
      trace.flags.push_back(
          "k=" + std::to_string(row_k) + " homo-above-threshold e=" +
          fmt("%.6e", energies[static_cast<size_t>(row_k)].homo_level));

    ScfRecord rec;
    rec.k = row_k;
    rec.orbital_energies = energies[static_cast<size_t>(row_k)].values;
    rec.gap = std::min(step.energies.gap, std::numeric_limits<double>::max());
    rec.pair_energy = pair_energy(densities[static_cast<size_t>(row_k)],
                                  densities[static_cast<size_t>(row_k) + 1], ctx);
    rec.hf_energy = hf_energy(densities[static_cast<size_t>(row_k)], ctx);
    rec.step_distance = hs_distance(densities[static_cast<size_t>(row_k) + 1],
                                    densities[static_cast<size_t>(row_k)]);
    OrbitalSet phi_k(coeffs[static_cast<size_t>(row_k)]);
    rec.residual_norm =
        residual_map(phi_k, step.orbitals, energies[static_cast<size_t>(row_k)],
                     step.energies, ctx)
            .total_norm();
    rec.kinetic_norms =
        column_norms_through(ctx.kinetic_lowdin.mat(),
                             coeffs[static_cast<size_t>(row_k)]);
    if (grid) {
      rec.moment_norms.resize(n_elec);
      for (int j = 0; j < n_elec; ++j)
        rec.moment_norms(j) = std::sqrt(
            coeffs[static_cast<size_t>(row_k)].col(j).cwiseAbs2().dot(
                moment_weights));
    }
    if (row_k >= 1) {
      rec.alpha = hs_distance(densities[static_cast<size_t>(row_k) + 1],
                              densities[static_cast<size_t>(row_k) - 1]);
      AlignmentPair pair =
          align_orbitals(step.orbitals,
                         OrbitalSet(coeffs[static_cast<size_t>(row_k) - 1]));
      const Mat diff =
          coeffs[static_cast<size_t>(row_k) + 1] * pair.a.transpose() -
          coeffs[static_cast<size_t>(row_k) - 1] * pair.a2.transpose();
      rec.aligned_step = h_norm(diff, ctx.kinetic_lowdin.mat());
    }
    trace.rows.push_back(std::move(rec));

    if (row_k >= 1 && trace.rows.back().alpha <= cfg.convergence_threshold)
      ++consecutive_alpha;
    else
      consecutive_alpha = 0;
    if (trace.rows.back().step_distance <= cfg.convergence_threshold)
      ++consecutive_step;
    else
      consecutive_step = 0;

    if (consecutive_alpha >= 3) {
      trace.stop_reason = StopReason::AlphaConverged;
      break;
    }
    if (consecutive_step >= 2) {
      trace.stop_reason = StopReason::FixedPointLocked;
      break;
    }
    if (static_cast<int>(coeffs.size()) - 1 >= cfg.max_iterations) {
      trace.stop_reason = StopReason::MaxIterations;
      break;
    }
  }

  const int last = static_cast<int>(coeffs.size()) - 1;  // iterate count K

  AlignmentChain chain = build_alignment_chain(coeffs);
  for (const std::string& flag : chain.flags) trace.flags.push_back(flag);

  auto aligned_or_raw = [&](int j) {
    if (j >= 0 && j <= last - 2 && chain.full[static_cast<size_t>(j)].size())
      return Mat(coeffs[static_cast<size_t>(j)] *
                 chain.full[static_cast<size_t>(j)].transpose());
    return coeffs[static_cast<size_t>(j)];
  };
  const int even_idx = (last % 2 == 0) ? last - 2 : last - 1;
  const int odd_idx = (last % 2 == 0) ? last - 1 : last - 2;

  FixedPointReport report =
      classify_fixed_point(OrbitalSet(aligned_or_raw(even_idx)),
                           OrbitalSet(aligned_or_raw(odd_idx)), ctx, cfg);
  report.details += " even_index=" + std::to_string(even_idx) +
                    " odd_index=" + std::to_string(odd_idx);

  if (trace.stop_reason == StopReason::MaxIterations &&
      trace.rows.back().alpha > 1e-8) {
    report.verdict = Verdict::Undetermined;
    report.details += " (two-step distance never stabilized)";
    trace.flags.push_back("max-iterations-without-two-step-stabilization");
  }
  trace.verdict = to_string(report.verdict);
  return {std::move(trace), std::move(report)};
}

}  // namespace scflab
