#pragma once

#include "scflab/core.hpp"
#include "scflab/models.hpp"

namespace scflab {

// N orthonormal orbital coefficient columns in the Lowdin frame.
class OrbitalSet {
public:
  OrbitalSet() = default;
  explicit OrbitalSet(Mat coeffs);

  const Mat& coeffs() const { return c_; }
  Index dim() const { return c_.rows(); }
  Index count() const { return c_.cols(); }
  double orthonormality_defect() const;

private:
  Mat c_;
};

// Idempotent rank-N symmetric projector in the Lowdin frame.
class DensityMatrix {
public:
  DensityMatrix() = default;
  DensityMatrix(const Mat& entries, int electron_count);

  const Mat& mat() const { return m_.mat(); }
  operator const Mat&() const { return m_.mat(); }
  int electron_count() const { return n_; }

private:
  SymMatrix m_;
  int n_ = 0;
};

struct OrbitalEnergies {
  Vec values;              // ascending
  double gap = 0.0;        // next eigenvalue minus values(N-1)
  double homo_level = 0.0; // values(N-1)
};

// The coupled residual of a pair of orbital sets with their energies: the
// first block holds F(D_phi2) c_i - e_i c_i, the second the mirrored block,
// and the scalar blocks the unit-norm defects. The total norm doubles the
// weight of the function blocks.
struct ResidualVector {
  Mat block1;
  Mat block2;
  Vec norm1_defect;
  Vec norm2_defect;
  double total_norm() const;
};

DensityMatrix density_from_orbitals(const OrbitalSet& phi);

// J(D) - K(D) mapped through the Lowdin frame. Accepts any symmetric matrix
// so tests can probe relaxed inputs such as D = 0.
SymMatrix build_g(const Mat& density, const BasisContext& ctx);

// h + G(D) in the Lowdin frame.
SymMatrix build_fock(const Mat& density, const BasisContext& ctx);

// Tr(h D) + Tr(G(D) D) / 2, in Hartree.
double hf_energy(const Mat& density, const BasisContext& ctx);

// Tr(h D) + Tr(h D2) + Tr(G(D) D2); symmetric in its density arguments.
double pair_energy(const Mat& density, const Mat& density2,
                   const BasisContext& ctx);

// Hilbert-Schmidt distance sqrt(Tr((D - D2)^2)).
double hs_distance(const Mat& density, const Mat& density2);

// B_ij = <phi_i, phi2_j> = (C1^T C2)_ij.
Mat orbital_overlap(const OrbitalSet& phi, const OrbitalSet& phi2);

ResidualVector residual_map(const OrbitalSet& phi, const OrbitalSet& phi2,
                            const OrbitalEnergies& e,
                            const OrbitalEnergies& e2,
                            const BasisContext& ctx);

}  // namespace scflab
