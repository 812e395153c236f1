#include "scflab/hf.hpp"
#include "scflab/numerics.hpp"
#include "scflab/rng.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace scflab;

namespace {

OrbitalSet random_orbitals(Rng& rng, Index m, Index n) {
  return OrbitalSet(rng.orthonormal(m, n));
}

}  // namespace

TEST_CASE("density_from_orbitals basics") {
  Mat c = Mat::Identity(5, 5).leftCols(2);
  DensityMatrix d = density_from_orbitals(OrbitalSet(c));
  Mat expected = Mat::Zero(5, 5);
  expected(0, 0) = expected(1, 1) = 1.0;
  CHECK((d.mat() - expected).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(17, "density");
  OrbitalSet phi = random_orbitals(rng, 8, 3);
  DensityMatrix dp = density_from_orbitals(phi);
  CHECK(std::abs(dp.mat().trace() - 3.0) <= 1e-12);

  // invariance under right-multiplication by an orthogonal matrix
  Mat a = rng.orthonormal(3, 3);
  DensityMatrix dq =
      density_from_orbitals(OrbitalSet(phi.coeffs() * a.transpose()));
  CHECK((dp.mat() - dq.mat()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("density_from_orbitals rejects non-orthonormal columns") {
  Mat c = Mat::Identity(4, 2);
  c(2, 0) = 0.5;
  CHECK_THROWS_AS(OrbitalSet{c}, InvalidOrbitals);
}

TEST_CASE("build_g linearity zero and positivity") {
  BasisContext grid = testing::grid_context(40);
  const int n = grid.dim;
  CHECK(build_g(Mat::Zero(n, n), grid).mat().cwiseAbs().maxCoeff() == 0.0);

  Rng rng(23, "gpos");
  OrbitalSet phi = random_orbitals(rng, n, 1);
  Mat g = build_g(density_from_orbitals(phi), grid);
  for (int trial = 0; trial < 100; ++trial) {
    Vec w(n);
    for (int i = 0; i < n; ++i) w(i) = rng.normal();
    w.normalize();
    CHECK(w.dot(g * w) >= -1e-12);
  }
}

TEST_CASE("build_g on the H2 ground density") {
  BasisContext ctx = testing::h2_context(1.4);
  auto [theta, emin] = testing::rank1_scan_minimum(ctx, 1e-4);
  Vec c(2);
  c << std::cos(theta), std::sin(theta);
  Mat d = c * c.transpose();
  Mat g = build_g(d, ctx);
  CHECK((g * d).trace() > 0.0);
}

TEST_CASE("build_fock is h plus the interaction") {
  BasisContext ctx = testing::h2_context(1.4);
  CHECK((build_fock(Mat::Zero(2, 2), ctx).mat() - ctx.core_lowdin.mat())
            .cwiseAbs()
            .maxCoeff() == 0.0);
  Rng rng(29, "fock");
  OrbitalSet phi = random_orbitals(rng, 2, 1);
  Mat d = density_from_orbitals(phi);
  CHECK((build_fock(d, ctx).mat() - ctx.core_lowdin.mat() -
         build_g(d, ctx).mat())
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("hf_energy identities") {
  BasisContext ctx = testing::grid_context(32);
  const int n = ctx.dim;
  CHECK(hf_energy(Mat::Zero(n, n), ctx) == 0.0);

  Rng rng(31, "energy");
  OrbitalSet phi = random_orbitals(rng, n, 2);
  Mat d = density_from_orbitals(phi);
  const double e = hf_energy(d, ctx);
  const double via_fock = 0.5 * ((ctx.core_lowdin.mat() * d).trace() +
                                 (build_fock(d, ctx).mat() * d).trace());
  CHECK(e == doctest::Approx(via_fock).epsilon(1e-12));
}

TEST_CASE("pair_energy symmetry and diagonal identity") {
  BasisContext ctx = testing::grid_context(32);
  const int n = ctx.dim;
  CHECK(pair_energy(Mat::Zero(n, n), Mat::Zero(n, n), ctx) == 0.0);

  Rng rng(37, "pair");
  for (int trial = 0; trial < 5; ++trial) {
    Mat d1 = density_from_orbitals(random_orbitals(rng, n, 2));
    Mat d2 = density_from_orbitals(random_orbitals(rng, n, 2));
    CHECK(pair_energy(d1, d2, ctx) ==
          doctest::Approx(pair_energy(d2, d1, ctx)).epsilon(1e-12));
    CHECK(pair_energy(d1, d1, ctx) ==
          doctest::Approx(2.0 * hf_energy(d1, ctx)).epsilon(1e-12));
  }
}

TEST_CASE("hs_distance basics and overlap formula") {
  Mat d1 = Mat::Zero(2, 2);
  d1(0, 0) = 1.0;
  Mat d2 = Mat::Zero(2, 2);
  d2(1, 1) = 1.0;
  CHECK(hs_distance(d1, d1) == 0.0);
  CHECK(hs_distance(d1, d2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  Rng rng(41, "hs");
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = 10, n = 3;
    OrbitalSet p1 = random_orbitals(rng, m, n);
    OrbitalSet p2 = random_orbitals(rng, m, n);
    const Mat b = orbital_overlap(p1, p2);
    const double direct =
        hs_distance(p1.coeffs() * p1.coeffs().transpose(),
                    p2.coeffs() * p2.coeffs().transpose());
    const double via_overlap = std::sqrt(2.0 * n - 2.0 * b.squaredNorm());
    CHECK(std::abs(direct - via_overlap) <= 1e-10);
  }
}

TEST_CASE("hs_distance triangle inequality on sampled triples") {
  Rng rng(43, "triangle");
  for (int trial = 0; trial < 30; ++trial) {
    const Index m = 7, n = 2;
    Mat a = density_from_orbitals(random_orbitals(rng, m, n));
    Mat b = density_from_orbitals(random_orbitals(rng, m, n));
    Mat c = density_from_orbitals(random_orbitals(rng, m, n));
    CHECK(hs_distance(a, c) <=
          hs_distance(a, b) + hs_distance(b, c) + 1e-10);
  }
}

TEST_CASE("orbital_overlap identity rotation and singular values") {
  Rng rng(47, "overlap");
  const Index m = 9, n = 3;
  OrbitalSet phi = random_orbitals(rng, m, n);
  CHECK((orbital_overlap(phi, phi) - Mat::Identity(n, n))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);

  Mat a = rng.orthonormal(n, n);
  OrbitalSet rotated(phi.coeffs() * a.transpose());
  CHECK((orbital_overlap(phi, rotated) - a.transpose())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    OrbitalSet p1 = random_orbitals(rng, m, n);
    OrbitalSet p2 = random_orbitals(rng, m, n);
    SvdDecomposition svd = svd_small(orbital_overlap(p1, p2));
    CHECK(svd.singular(0) <= 1.0 + 1e-10);
    CHECK(svd.singular(n - 1) >= 0.0);
  }
}

TEST_CASE("residual_map at a non-interacting fixed point") {
  BasisContext ctx = testing::without_interaction(testing::grid_context(32));
  EigDecomposition eig = jacobi_eigh(ctx.core_lowdin);
  const int n = 2;
  Mat c = eig.vectors.leftCols(n);
  OrbitalSet phi(c);
  OrbitalEnergies e;
  e.values = eig.values.head(n);
  e.gap = eig.values(n) - eig.values(n - 1);
  e.homo_level = e.values(n - 1);
  ResidualVector r = residual_map(phi, phi, e, e, ctx);
  CHECK(r.total_norm() <= 1e-8);
  CHECK(r.norm1_defect.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(r.norm2_defect.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("residual_map mid-run: second block vanishes, first does not") {
  BasisContext ctx = testing::grid_context(40);
  ScfConfig cfg;
  // two aufbau steps from the core guess
  EigDecomposition guess = jacobi_eigh(ctx.core_lowdin);
  Mat c0 = guess.vectors.leftCols(2);
  ScfStepResult s1 = scf_step(c0 * c0.transpose(), ctx, cfg);
  ScfStepResult s2 = scf_step(s1.density, ctx, cfg);
  ResidualVector r =
      residual_map(s1.orbitals, s2.orbitals, s1.energies, s2.energies, ctx);
  CHECK(r.block2.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(r.block1.norm() > 1e-4);
  // the total norm doubles the weight of the function blocks
  CHECK(r.total_norm() ==
        doctest::Approx(std::sqrt(2.0 * r.block1.squaredNorm() +
                                  2.0 * r.block2.squaredNorm() +
                                  r.norm1_defect.squaredNorm() +
                                  r.norm2_defect.squaredNorm()))
            .epsilon(1e-14));
}
