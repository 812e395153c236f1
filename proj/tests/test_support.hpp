#pragma once

#include "scflab/io.hpp"
#include "scflab/models.hpp"
#include "scflab/numerics.hpp"
#include "scflab/scf.hpp"

#include <cmath>
#include <filesystem>
#include <functional>

namespace scflab::testing {

inline std::filesystem::path source_dir() { return SCFLAB_SOURCE_DIR; }
inline std::filesystem::path share_dir() { return source_dir() / "share"; }
inline std::filesystem::path config_dir() { return source_dir() / "configs"; }

// Adaptive Simpson quadrature, used as an independent integral oracle.
inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol = 1e-13,
                               int depth = 30) {
  std::function<double(double, double, double, double, double, double, int)>
      rec = [&](double lo, double hi, double flo, double fmid, double fhi,
                double whole, int d) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid);
    const double rm = 0.5 * (mid + hi);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol)
      return left + right + (left + right - whole) / 15.0;
    return rec(lo, mid, flo, flm, fmid, left, d - 1) +
           rec(mid, hi, fmid, frm, fhi, right, d - 1);
  };
  const double mid = 0.5 * (a + b);
  const double fa = f(a), fm = f(mid), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(a, b, fa, fm, fb, whole, depth);
}

inline Geometry h2_geometry(double separation = 1.4) {
  Geometry geom;
  geom.nuclei = {{1.0, {0.0, 0.0, 0.0}}, {1.0, {0.0, 0.0, separation}}};
  geom.electron_count = 1;
  return geom;
}

inline BasisContext h2_context(double separation = 1.4) {
  BasisLibrary lib = load_basis_file(share_dir() / "sto3g.basis");
  const Geometry geom = h2_geometry(separation);
  return build_gaussian_backend(geom, assign_contractions(geom, lib));
}

inline BasisContext grid_context(int points = 48, double half_width = 8.0,
                                 double softening = 1.0, double z = 2.0,
                                 int electrons = 2) {
  Geometry geom;
  geom.nuclei = {{z, {0.0, 0.0, 0.0}}};
  geom.electron_count = electrons;
  return build_grid1d_backend(half_width, points, softening, geom);
}

// Same discretization with the two-electron interaction removed.
inline BasisContext without_interaction(BasisContext ctx) {
  const int m = ctx.dim;
  ctx.eri = [m](const Mat&) {
    return JkPair{Mat::Zero(m, m), Mat::Zero(m, m)};
  };
  return ctx;
}

// Brute-force minimizer over the one-parameter family of rank-1 idempotent
// 2x2 Lowdin-frame densities D(theta) = c c^T, c = (cos theta, sin theta).
// The energy is assembled from the raw contraction interface, independent of
// the engine path: an angle grid of the requested resolution followed by a
// golden-section refinement of the best bracket.
inline std::pair<double, double> rank1_scan_minimum(const BasisContext& ctx,
                                                    double grid_step = 1e-6) {
  if (ctx.dim != 2)
    throw std::invalid_argument("rank1_scan_minimum: needs a 2-dim basis");
  const Mat& x = ctx.orthonormalizer;
  // recover the raw (pq|rs) tensor through the contraction interface, then
  // transform it to the Lowdin frame
  double ao[2][2][2][2];
  for (int r = 0; r < 2; ++r)
    for (int s = 0; s < 2; ++s) {
      Mat unit = Mat::Zero(2, 2);
      unit(r, s) = 1.0;
      Mat j = ctx.eri(unit).coulomb;
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) ao[p][q][r][s] = j(p, q);
    }
  double tl[2][2][2][2];
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) {
          double acc = 0.0;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d)
                  acc += x(a, p) * x(b, q) * x(c, r) * x(d, s) * ao[a][b][c][d];
          tl[p][q][r][s] = acc;
        }
  const Mat& hl = ctx.core_lowdin.mat();
  auto energy = [&](double theta) {
    const double c0 = std::cos(theta);
    const double c1 = std::sin(theta);
    const double d[2][2] = {{c0 * c0, c0 * c1}, {c0 * c1, c1 * c1}};
    double e = 0.0;
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) e += hl(p, q) * d[p][q];
    double coul = 0.0, exch = 0.0;
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q)
        for (int r = 0; r < 2; ++r)
          for (int s = 0; s < 2; ++s) {
            coul += tl[p][q][r][s] * d[p][q] * d[r][s];
            exch += tl[p][r][q][s] * d[p][q] * d[r][s];
          }
    return e + 0.5 * (coul - exch);
  };

  double best_theta = 0.0;
  double best = energy(0.0);
  const long steps = static_cast<long>(M_PI / grid_step);
  for (long i = 1; i < steps; ++i) {
    const double th = i * grid_step;
    const double val = energy(th);
    if (val < best) {
      best = val;
      best_theta = th;
    }
  }
  // golden-section refinement of the winning bracket
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best_theta - grid_step;
  double hi = best_theta + grid_step;
  double c = hi - gr * (hi - lo);
  double d2 = lo + gr * (hi - lo);
  double fc = energy(c), fd = energy(d2);
  while (hi - lo > 1e-12) {
    if (fc < fd) {
      hi = d2;
      d2 = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = energy(c);
    } else {
      lo = c;
      c = d2;
      fc = fd;
      d2 = lo + gr * (hi - lo);
      fd = energy(d2);
    }
  }
  const double theta = 0.5 * (lo + hi);
  return {theta, energy(theta)};
}

// Drive scf_step directly and return the whole iterate history.
inline std::vector<Mat> collect_iterates(const BasisContext& ctx,
                                         const ScfConfig& cfg, int steps) {
  std::vector<Mat> coeffs;
  Mat d;
  {
    auto guess = jacobi_eigh(ctx.core_lowdin);
    Mat c(ctx.dim, ctx.geometry.electron_count);
    for (int j = 0; j < ctx.geometry.electron_count; ++j)
      c.col(j) = guess.vectors.col(j);
    coeffs.push_back(c);
    d = c * c.transpose();
  }
  for (int k = 0; k < steps; ++k) {
    ScfStepResult step = scf_step(d, ctx, cfg);
    coeffs.push_back(step.orbitals.coeffs());
    d = step.density.mat();
  }
  return coeffs;
}

}  // namespace scflab::testing
