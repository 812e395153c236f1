#pragma once

#include "scflab/hf.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace scflab {

enum class InitialGuess { Core, GivenDensity, RandomOrthonormal };
enum class Verdict { ConvergedHfSolution, TwoCycleOscillation, Undetermined };
enum class StopReason { AlphaConverged, FixedPointLocked, MaxIterations };

std::string to_string(Verdict v);
std::string to_string(StopReason r);

struct ScfConfig {
  int max_iterations = 200;
  // stopping acts on alpha_k = ||D^{k+1} - D^{k-1}||_2, the two-step distance
  double convergence_threshold = 1e-9;
  double gap_floor = 1e-6;
  double tie_tolerance = 1e-8;
  InitialGuess initial_guess = InitialGuess::Core;
  std::uint64_t seed = 0;
  Mat given_density;  // used when initial_guess == GivenDensity

  // fixed-point classification
  double residual_threshold = 1e-8;  // self-consistency residual for a true solution
  double theta_tolerance = 1e-6;     // 1 - sigma_min below this: even/odd spans agree
  double oscillation_floor = 1e-2;   // defect above this: two-cycle
  double homo_threshold = 0.0;       // orbital-energy monitor level
};

struct ScfRecord {
  int k = 0;
  Vec orbital_energies;       // energies attached to iterate k
  double gap = 0.0;           // spectral gap of the Fock operator built at iterate k
  double pair_energy = 0.0;   // two-argument energy of (k, k+1)
  double hf_energy = 0.0;     // single-density energy at k
  double step_distance = 0.0; // ||D^{k+1} - D^k||
  double alpha = 0.0;         // ||D^{k+1} - D^{k-1}||, 0 at k = 0
  double residual_norm = 0.0; // coupled residual of (k, k+1)
  double aligned_step = 0.0;  // ||Xi^{k+1} - Xi^{k-1}|| in the discrete H-norm, 0 at k = 0
  Vec kinetic_norms;          // per-orbital sqrt(c^T T c)
  Vec moment_norms;           // per-orbital ||<x> phi||, grid backend only
};

struct ScfTrace {
  std::vector<ScfRecord> rows;
  std::vector<std::string> flags;
  int electron_count = 0;
  std::string backend_tag;
  StopReason stop_reason = StopReason::MaxIterations;
  std::string verdict;  // echo of the classification, for offline checks
};

// A * overlap(phi, phi2) * A2^T is diagonal with the singular values on it.
struct AlignmentPair {
  Mat a;
  Mat a2;
  Vec singular;
};

struct FixedPointReport {
  OrbitalSet even_limit;
  OrbitalSet odd_limit;
  DensityMatrix even_density;
  DensityMatrix odd_density;
  double limit_gap = 0.0;
  OrbitalSet canonical_orbitals;       // aufbau eigenvectors of F(D_even)
  OrbitalEnergies canonical_energies;
  double unitary_relation_defect = 0.0;     // 1 - sigma_min(overlap(even, odd))
  double canonical_alignment_defect = 0.0;  // 1 - sigma_min(overlap(canonical, odd))
  double hf_residual = 0.0;
  Verdict verdict = Verdict::Undetermined;
  std::string details;
};

struct ScfStepResult {
  OrbitalSet orbitals;
  OrbitalEnergies energies;
  DensityMatrix density;
  bool gap_below_floor = false;
  bool fermi_tie = false;
};

// One aufbau step: diagonalize F(d) and occupy the N lowest eigenvectors.
// Eigenvector signs are fixed and Fermi-level ties are resolved by the
// lexicographic magnitude rule, so the step is deterministic.
ScfStepResult scf_step(const Mat& density, const BasisContext& ctx,
                       const ScfConfig& cfg);

// Full iteration with trace recording, two-step stopping and fixed-point
// classification of the final even/odd iterates.
std::pair<ScfTrace, FixedPointReport> run_scf(const BasisContext& ctx,
                                              const ScfConfig& cfg);

// Unitary alignment of two orbital sets from the SVD of their overlap.
AlignmentPair align_orbitals(const OrbitalSet& phi, const OrbitalSet& phi2);

// Chain step A~_{k+1} = A~_{k-1} * Aplus_{k+1} * inv(Aminus_{k+1}). A result
// drifting off the orthogonal manifold (defect > 1e-8) resets the chain to
// the identity and reports degradation.
Mat alignment_chain_update(const Mat& prev_chain, const Mat& a_plus,
                           const Mat& a_minus, bool* degraded = nullptr);

// Recursive alignment over a whole iterate history. full[j] maps iterate j
// to its chain representative (coefficients C_j * full[j]^T); defined for
// j <= K-2 because each entry needs the pair alignment with iterate j+2.
struct AlignmentChain {
  std::vector<Mat> full;
  std::vector<std::string> flags;
};
AlignmentChain build_alignment_chain(const std::vector<Mat>& coeffs);

FixedPointReport classify_fixed_point(const OrbitalSet& even,
                                      const OrbitalSet& odd,
                                      const BasisContext& ctx,
                                      const ScfConfig& cfg);

}  // namespace scflab
