#include "scflab/hf.hpp"

#include <cmath>

namespace scflab {

OrbitalSet::OrbitalSet(Mat coeffs) : c_(std::move(coeffs)) {
  if (c_.cols() < 1 || c_.rows() < c_.cols())
    throw InvalidOrbitals("OrbitalSet: need 1 <= N <= M columns");
  const double defect =
      (c_.transpose() * c_ - Mat::Identity(c_.cols(), c_.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (defect > 1e-8)
    throw InvalidOrbitals("OrbitalSet: orthonormality defect " +
                          std::to_string(defect));
}

double OrbitalSet::orthonormality_defect() const {
  return (c_.transpose() * c_ - Mat::Identity(c_.cols(), c_.cols()))
      .cwiseAbs()
      .maxCoeff();
}

DensityMatrix::DensityMatrix(const Mat& entries, int electron_count)
    : m_(entries), n_(electron_count) {
  const Mat& d = m_.mat();
  const double scale = std::max(1.0, d.norm());
  if ((d * d - d).norm() > 1e-10 * scale)
    throw InvalidInput("DensityMatrix: not idempotent");
  if (std::abs(d.trace() - electron_count) > 1e-10 * scale)
    throw InvalidInput("DensityMatrix: trace != electron count");
}

double ResidualVector::total_norm() const {
  return std::sqrt(2.0 * block1.squaredNorm() + 2.0 * block2.squaredNorm() +
                   norm1_defect.squaredNorm() + norm2_defect.squaredNorm());
}

DensityMatrix density_from_orbitals(const OrbitalSet& phi) {
  if (phi.orthonormality_defect() > 1e-8)
    throw InvalidOrbitals("density_from_orbitals: orbitals not orthonormal");
  return DensityMatrix(phi.coeffs() * phi.coeffs().transpose(),
                       static_cast<int>(phi.count()));
}

SymMatrix build_g(const Mat& density, const BasisContext& ctx) {
  const Mat& x = ctx.orthonormalizer;
  const Mat d_basis = x * density * x.transpose();
  JkPair jk = ctx.eri(d_basis);
  return SymMatrix(x.transpose() * (jk.coulomb - jk.exchange) * x);
}

SymMatrix build_fock(const Mat& density, const BasisContext& ctx) {
  return SymMatrix(ctx.core_lowdin.mat() + build_g(density, ctx).mat());
}

double hf_energy(const Mat& density, const BasisContext& ctx) {
  const Mat g = build_g(density, ctx);
  return (ctx.core_lowdin.mat() * density).trace() +
         0.5 * (g * density).trace();
}

double pair_energy(const Mat& density, const Mat& density2,
                   const BasisContext& ctx) {
  const Mat g = build_g(density, ctx);
  return (ctx.core_lowdin.mat() * density).trace() +
         (ctx.core_lowdin.mat() * density2).trace() +
         (g * density2).trace();
}

double hs_distance(const Mat& density, const Mat& density2) {
  return (density - density2).norm();
}

Mat orbital_overlap(const OrbitalSet& phi, const OrbitalSet& phi2) {
  return phi.coeffs().transpose() * phi2.coeffs();
}

ResidualVector residual_map(const OrbitalSet& phi, const OrbitalSet& phi2,
                            const OrbitalEnergies& e,
                            const OrbitalEnergies& e2,
                            const BasisContext& ctx) {
  const Mat f_of_2 = build_fock(density_from_orbitals(phi2), ctx);
  const Mat f_of_1 = build_fock(density_from_orbitals(phi), ctx);
  ResidualVector r;
  r.block1 = f_of_2 * phi.coeffs() - phi.coeffs() * e.values.asDiagonal();
  r.block2 = f_of_1 * phi2.coeffs() - phi2.coeffs() * e2.values.asDiagonal();
  r.norm1_defect = Vec::Ones(phi.count()) -
                   phi.coeffs().colwise().squaredNorm().transpose();
  r.norm2_defect = Vec::Ones(phi2.count()) -
                   phi2.coeffs().colwise().squaredNorm().transpose();
  return r;
}

}  // namespace scflab
