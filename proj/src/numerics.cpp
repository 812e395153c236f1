#include "scflab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace scflab {

namespace {

double off_diagonal_norm(const Mat& a) {
  double s = 0.0;
  const Index n = a.rows();
  for (Index p = 0; p < n; ++p)
    for (Index q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
  return std::sqrt(s);
}

// Make the largest-magnitude entry of v positive; ties resolved by the
// lowest index so the convention is reproducible.
void fix_column_sign(Eigen::Ref<Vec> v) {
  Index best = 0;
  double mag = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > mag) {
      mag = std::abs(v(i));
      best = i;
    }
  }
  if (v(best) < 0.0) v = -v;
}

}  // namespace

EigDecomposition jacobi_eigh(const SymMatrix& a) {
  const Mat& src = a.mat();
  if (!src.allFinite())
    throw std::invalid_argument("jacobi_eigh: non-finite entries");
  const Index n = src.rows();
  if (n < 1) throw std::invalid_argument("jacobi_eigh: empty matrix");

  Mat w = src;
  Mat v = Mat::Identity(n, n);
  const double scale = src.norm();
  const double target = 1e-13 * scale;
  // Pivots below this cannot push the off-diagonal norm above the target.
  const double skip = target / (2.0 * static_cast<double>(n));

  double off = off_diagonal_norm(w);
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off > target; ++sweep) {
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        if (std::abs(apq) <= skip) continue;
        const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
        const double t =
            (theta >= 0.0 ? 1.0 : -1.0) /
            (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        w(p, p) -= t * apq;
        w(q, q) += t * apq;
        w(p, q) = 0.0;
        w(q, p) = 0.0;
        for (Index i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double wip = w(i, p);
          const double wiq = w(i, q);
          w(i, p) = c * wip - s * wiq;
          w(p, i) = w(i, p);
          w(i, q) = s * wip + c * wiq;
          w(q, i) = w(i, q);
        }
        for (Index i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
    off = off_diagonal_norm(w);
  }
  if (off > target)
    throw NumericFailure("jacobi_eigh: sweep cap reached", off);

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return w(i, i) < w(j, j); });

  EigDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.values(k) = w(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<size_t>(k)]);
  }
  return out;
}

SvdDecomposition svd_small(const Mat& b) {
  if (b.rows() != b.cols())
    throw std::invalid_argument("svd_small: matrix must be square");
  if (!b.allFinite())
    throw std::invalid_argument("svd_small: non-finite entries");
  const Index n = b.rows();

  EigDecomposition eig = jacobi_eigh(SymMatrix(b.transpose() * b));

  SvdDecomposition out;
  out.left.resize(n, n);
  out.singular.resize(n);
  out.right.resize(n, n);

  const double cutoff = 1e-13 * std::max(1.0, b.norm());
  std::vector<Index> rank_deficient;
  for (Index k = 0; k < n; ++k) {
    // eigenvalues ascending -> singular values descending
    Vec v = eig.vectors.col(n - 1 - k);
    fix_column_sign(v);
    out.right.col(k) = v;
    Vec bv = b * v;
    const double sigma = bv.norm();
    if (sigma > cutoff) {
      out.singular(k) = sigma;
      out.left.col(k) = bv / sigma;
    } else {
      out.singular(k) = 0.0;
      out.left.col(k).setZero();
      rank_deficient.push_back(k);
    }
  }

  // Complete null columns of U deterministically from the identity basis.
  for (Index k : rank_deficient) {
    for (Index cand = 0; cand < n; ++cand) {
      Vec u = Vec::Zero(n);
      u(cand) = 1.0;
      for (Index j = 0; j < n; ++j)
        if (j != k && (out.singular(j) > 0.0 || j < k))
          u -= out.left.col(j).dot(u) * out.left.col(j);
      const double nu = u.norm();
      if (nu > 0.5) {
        out.left.col(k) = u / nu;
        break;
      }
    }
  }

  // Gram-Schmidt polish; perturbations scale with the tiny singular values
  // involved, so the reconstruction is unaffected.
  for (Index k = 0; k < n; ++k) {
    Vec u = out.left.col(k);
    for (Index j = 0; j < k; ++j) u -= out.left.col(j).dot(u) * out.left.col(j);
    out.left.col(k) = u / u.norm();
  }

  // Guarantee the descending invariant exactly.
  for (Index k = 0; k + 1 < n; ++k) {
    if (out.singular(k) < out.singular(k + 1)) {
      std::swap(out.singular(k), out.singular(k + 1));
      out.left.col(k).swap(out.left.col(k + 1));
      out.right.col(k).swap(out.right.col(k + 1));
      k = std::max(Index{0}, k - 2);
    }
  }
  return out;
}

Mat sqrt_inv_spd(const SymMatrix& s) {
  EigDecomposition eig = jacobi_eigh(s);
  if (eig.values(0) < 1e-10)
    throw NearLinearDependence(
        "sqrt_inv_spd: smallest eigenvalue " + std::to_string(eig.values(0)) +
        " below 1e-10; basis rejected");
  Vec inv_sqrt = eig.values.cwiseSqrt().cwiseInverse();
  return eig.vectors * inv_sqrt.asDiagonal() * eig.vectors.transpose();
}

namespace detail {

double erf_split(double x) {
  const double ax = std::abs(x);
  double result;
  if (ax < 3.0) {
    // erf(x) = 2/sqrt(pi) e^{-x^2} sum_n 2^n x^{2n+1} / (1*3*...*(2n+1));
    // all terms positive, no cancellation.
    const double x2 = ax * ax;
    double term = ax;
    double sum = ax;
    for (int n = 0; n < 200; ++n) {
      term *= 2.0 * x2 / (2.0 * n + 3.0);
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    result = 2.0 / std::sqrt(M_PI) * std::exp(-x2) * sum;
  } else {
    // sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    double f = 0.0;
    for (int m = 60; m >= 1; --m) f = (0.5 * m) / (ax + f);
    const double erfc = std::exp(-ax * ax) / (std::sqrt(M_PI) * (ax + f));
    result = 1.0 - erfc;
  }
  return x < 0.0 ? -result : result;
}

}  // namespace detail

double boys_f0(double t) {
  if (t < 0.0) throw std::domain_error("boys_f0: t must be nonnegative");
  if (t <= 1e-6) {
    // 6-term Taylor expansion of int_0^1 exp(-t u^2) du
    return 1.0 - t / 3.0 + t * t / 10.0 - t * t * t / 42.0 +
           t * t * t * t / 216.0 - t * t * t * t * t / 1320.0;
  }
  const double rt = std::sqrt(t);
  return 0.5 * std::sqrt(M_PI / t) * detail::erf_split(rt);
}

}  // namespace scflab
