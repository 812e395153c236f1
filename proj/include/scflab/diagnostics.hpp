#pragma once

#include "scflab/scf.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scflab {

enum class LemmaId {
  Descent,
  Wpbound,
  Ubound,
  Gammabound,
  Hbound,
  Expbound,
  Series,
  Lojasiewicz,
  Theorem1Cauchy,
};

std::string to_string(LemmaId id);

struct LemmaCheckResult {
  LemmaId lemma_id = LemmaId::Descent;
  bool passed = true;
  double worst_margin = 0.0;  // most negative slack observed
  long location = -1;         // iteration or sample index of the worst margin
  std::string details;
};

struct LojasiewiczFit {
  double mu_estimate = 0.0;
  double kappa_estimate = 0.0;
  std::vector<double> ratios;  // |E_k - mu|^{1/2} / ||F_k|| over the window
  long window_start = 0;
  long window_end = 0;  // inclusive row indices
  double max_over_median = 0.0;
  std::string note;
};

// Pair energies nonincreasing with relative slack 1e-12.
LemmaCheckResult check_descent(const ScfTrace& trace);

// E_k - E_{k+1} >= gamma/2 * ||D^{k+2} - D^k||^2 - 1e-10, gamma taken as the
// minimum recorded gap.
LemmaCheckResult check_wpbound(const ScfTrace& trace);

// Random orthonormal pairs: alignment inequality, the exact coefficient
// identity ||A phi - A~ phi~||^2 = 2(N - sum sigma), and the overlap form of
// the squared Hilbert-Schmidt distance, all to 1e-10.
LemmaCheckResult check_ubound(int samples, int m_min, int m_max, int n_min,
                              int n_max, std::uint64_t seed);

// Tail-window ratio fit of |E_k - mu|^{1/2} against the recorded residual
// norms. Ratios are dropped when the residual sits below 1e-14 or the energy
// offset is below round-off relative to mu.
LojasiewiczFit probe_lojasiewicz(const ScfTrace& trace, double tail_fraction);
LemmaCheckResult check_lojasiewicz(const ScfTrace& trace,
                                   double tail_fraction);

// Positive-series test: the partial-sum bound
// sqrt(sum_{k<=K} a_k) <= sqrt(a_1) + sqrt(sum_{k<=K} a_{k+1}^2/a_k)
// must hold at every K; when the ratio series is Cauchy-flat the plain
// series must be too.
LemmaCheckResult check_series(const std::vector<double>& alphas);

// The strictly positive leading alphas of a trace (rows k >= 1, cut at the
// first exact zero).
std::vector<double> trace_alphas(const ScfTrace& trace);

// Uniform-boundedness monitors for kinetic norms, spatial moments and the
// orbital-energy level. ctx may be null when only the trace is available.
std::vector<LemmaCheckResult> check_monitored_bounds(const ScfTrace& trace,
                                                     const BasisContext* ctx);

// Two-step distances below 1e-9, parity subsequences shrinking over the
// final window, aligned orbital differences below 1e-6 in the H-norm.
LemmaCheckResult check_theorem1_cauchy(const ScfTrace& trace);

}  // namespace scflab
