#include "scflab/models.hpp"

#include "scflab/numerics.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace scflab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double primitive_norm(double alpha) {
  return std::pow(2.0 * alpha / kPi, 0.75);
}

// <g_a(A) | g_b(B)> for unnormalized s primitives
double prim_overlap(double a, double b, double r2) {
  const double p = a + b;
  return std::pow(kPi / p, 1.5) * std::exp(-a * b / p * r2);
}

// <g_a(A) | -Delta/2 | g_b(B)>
double prim_kinetic_half(double a, double b, double r2) {
  const double p = a + b;
  const double mu = a * b / p;
  return mu * (3.0 - 2.0 * mu * r2) * std::pow(kPi / p, 1.5) *
         std::exp(-mu * r2);
}

// <g_a(A) | 1/|r-C| | g_b(B)>
double prim_nuclear(double a, const Eigen::Vector3d& A, double b,
                    const Eigen::Vector3d& B, const Eigen::Vector3d& C) {
  const double p = a + b;
  const Eigen::Vector3d P = (a * A + b * B) / p;
  const double r2ab = (A - B).squaredNorm();
  return 2.0 * kPi / p * std::exp(-a * b / p * r2ab) *
         boys_f0(p * (P - C).squaredNorm());
}

// (g_a(A) g_b(B) | g_c(C) g_d(D)) in chemist notation, s primitives
double prim_eri(double a, const Eigen::Vector3d& A, double b,
                const Eigen::Vector3d& B, double c, const Eigen::Vector3d& C,
                double d, const Eigen::Vector3d& D) {
  const double p = a + b;
  const double q = c + d;
  const Eigen::Vector3d P = (a * A + b * B) / p;
  const Eigen::Vector3d Q = (c * C + d * D) / q;
  const double pref = 2.0 * std::pow(kPi, 2.5) / (p * q * std::sqrt(p + q));
  const double expo = std::exp(-a * b / p * (A - B).squaredNorm() -
                               c * d / q * (C - D).squaredNorm());
  return pref * expo * boys_f0(p * q / (p + q) * (P - Q).squaredNorm());
}

struct Shell {
  Eigen::Vector3d center;
  std::vector<double> exponents;
  std::vector<double> coefficients;  // include primitive norms and the
                                     // contraction renormalization
};

void finalize_lowdin(BasisContext& ctx) {
  const Mat& x = ctx.orthonormalizer;
  ctx.core_lowdin = SymMatrix(x.transpose() * ctx.core.mat() * x);
  ctx.kinetic_lowdin = SymMatrix(x.transpose() * ctx.kinetic.mat() * x);
}

std::string element_for_charge(double z) {
  if (std::abs(z - 1.0) < 1e-9) return "H";
  if (std::abs(z - 2.0) < 1e-9) return "He";
  throw InvalidGeometry("gaussian backend supports H (Z=1) and He (Z=2) only; got Z=" +
                        std::to_string(z));
}

}  // namespace

BasisLibrary load_basis_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open basis file: " + path.string());
  BasisLibrary lib;
  std::string line;
  std::string open_element;
  ContractedS open;
  long lineno = 0;
  auto flush = [&]() {
    if (!open_element.empty()) {
      lib[open_element].push_back(open);
      open = ContractedS{};
      open_element.clear();
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string element;
    if (!(ss >> element)) {
      flush();  // blank line closes the open contraction
      continue;
    }
    double exponent = 0.0, coefficient = 0.0;
    if (!(ss >> exponent >> coefficient))
      throw ConfigError("basis file: expected 'element exponent coefficient'",
                        lineno);
    if (exponent <= 0.0)
      throw ConfigError("basis file: exponent must be positive", lineno);
    if (element != open_element) flush();
    open_element = element;
    open.exponents.push_back(exponent);
    open.coefficients.push_back(coefficient);
  }
  flush();
  if (lib.empty()) throw ConfigError("basis file is empty: " + path.string());
  return lib;
}

std::vector<std::vector<ContractedS>> assign_contractions(
    const Geometry& geom, const BasisLibrary& lib) {
  std::vector<std::vector<ContractedS>> out;
  out.reserve(geom.nuclei.size());
  for (const Nucleus& nuc : geom.nuclei) {
    const std::string element = element_for_charge(nuc.charge);
    auto it = lib.find(element);
    if (it == lib.end() || it->second.empty())
      throw ConfigError("basis library has no functions for element " +
                        element);
    out.push_back(it->second);
  }
  return out;
}

BasisContext build_gaussian_backend(
    const Geometry& geom,
    const std::vector<std::vector<ContractedS>>& contractions_per_atom,
    double kinetic_factor) {
  if (geom.nuclei.empty()) throw InvalidGeometry("no nuclei");
  if (geom.electron_count < 1)
    throw InvalidGeometry("electron count must be >= 1");
  if (contractions_per_atom.size() != geom.nuclei.size())
    throw InvalidGeometry("one contraction list per atom required");
  for (size_t i = 0; i < geom.nuclei.size(); ++i) {
    if (geom.nuclei[i].charge <= 0.0)
      throw InvalidGeometry("nuclear charge must be positive");
    if (contractions_per_atom[i].empty())
      throw InvalidGeometry("every atom needs at least one contracted function");
    for (size_t j = i + 1; j < geom.nuclei.size(); ++j)
      if ((geom.nuclei[i].position - geom.nuclei[j].position).norm() < 1e-12)
        throw InvalidGeometry("duplicate nuclei at identical positions");
  }

  std::vector<Shell> shells;
  for (size_t atom = 0; atom < geom.nuclei.size(); ++atom) {
    for (const ContractedS& c : contractions_per_atom[atom]) {
      Shell sh;
      sh.center = geom.nuclei[atom].position;
      sh.exponents = c.exponents;
      sh.coefficients.resize(c.coefficients.size());
      for (size_t p = 0; p < c.exponents.size(); ++p) {
        if (c.exponents[p] <= 0.0)
          throw InvalidGeometry("gaussian exponents must be positive");
        sh.coefficients[p] =
            c.coefficients[p] * primitive_norm(c.exponents[p]);
      }
      // renormalize the contraction so the diagonal overlap is exactly 1
      double self = 0.0;
      for (size_t p = 0; p < sh.exponents.size(); ++p)
        for (size_t q = 0; q < sh.exponents.size(); ++q)
          self += sh.coefficients[p] * sh.coefficients[q] *
                  prim_overlap(sh.exponents[p], sh.exponents[q], 0.0);
      const double scale = 1.0 / std::sqrt(self);
      for (double& cc : sh.coefficients) cc *= scale;
      shells.push_back(std::move(sh));
    }
  }

  const int m = static_cast<int>(shells.size());
  Mat s(m, m), t(m, m), v(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const Shell& a = shells[static_cast<size_t>(i)];
      const Shell& b = shells[static_cast<size_t>(j)];
      const double r2 = (a.center - b.center).squaredNorm();
      double sij = 0.0, tij = 0.0, vij = 0.0;
      for (size_t p = 0; p < a.exponents.size(); ++p) {
        for (size_t q = 0; q < b.exponents.size(); ++q) {
          const double cpq = a.coefficients[p] * b.coefficients[q];
          sij += cpq * prim_overlap(a.exponents[p], b.exponents[q], r2);
          tij += cpq * prim_kinetic_half(a.exponents[p], b.exponents[q], r2);
          for (const Nucleus& nuc : geom.nuclei)
            vij -= nuc.charge * cpq *
                   prim_nuclear(a.exponents[p], a.center, b.exponents[q],
                                b.center, nuc.position);
        }
      }
      s(i, j) = sij;
      t(i, j) = 2.0 * kinetic_factor * tij;  // -Delta scaled by the factor
      v(i, j) = vij;
    }
  }

  // full (ij|kl) tensor; M stays tiny so no symmetry packing is needed
  auto tensor = std::make_shared<std::vector<double>>(
      static_cast<size_t>(m) * m * m * m, 0.0);
  auto at = [m](int i, int j, int k, int l) {
    return ((static_cast<size_t>(i) * m + j) * m + k) * m + l;
  };
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = k; l < m; ++l) {
          if (i * m + j > k * m + l) continue;
          const Shell& A = shells[static_cast<size_t>(i)];
          const Shell& B = shells[static_cast<size_t>(j)];
          const Shell& C = shells[static_cast<size_t>(k)];
          const Shell& D = shells[static_cast<size_t>(l)];
          double val = 0.0;
          for (size_t p = 0; p < A.exponents.size(); ++p)
            for (size_t q = 0; q < B.exponents.size(); ++q)
              for (size_t r = 0; r < C.exponents.size(); ++r)
                for (size_t u = 0; u < D.exponents.size(); ++u)
                  val += A.coefficients[p] * B.coefficients[q] *
                         C.coefficients[r] * D.coefficients[u] *
                         prim_eri(A.exponents[p], A.center, B.exponents[q],
                                  B.center, C.exponents[r], C.center,
                                  D.exponents[u], D.center);
          for (auto [ii, jj] : {std::pair{i, j}, std::pair{j, i}})
            for (auto [kk, ll] : {std::pair{k, l}, std::pair{l, k}}) {
              (*tensor)[at(ii, jj, kk, ll)] = val;
              (*tensor)[at(kk, ll, ii, jj)] = val;
            }
        }

  BasisContext ctx;
  ctx.dim = m;
  ctx.overlap = SymMatrix(s);
  ctx.kinetic = SymMatrix(t);
  ctx.core = SymMatrix(t + v);
  ctx.backend_tag = "gaussian";
  ctx.geometry = geom;
  ctx.orthonormalizer = sqrt_inv_spd(ctx.overlap);
  ctx.eri = [tensor, m, at](const Mat& d) {
    JkPair jk{Mat::Zero(m, m), Mat::Zero(m, m)};
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q) {
        double j = 0.0, k = 0.0;
        for (int r = 0; r < m; ++r)
          for (int ss = 0; ss < m; ++ss) {
            j += (*tensor)[at(p, q, r, ss)] * d(r, ss);
            k += (*tensor)[at(p, r, q, ss)] * d(r, ss);
          }
        jk.coulomb(p, q) = j;
        jk.exchange(p, q) = k;
      }
    return jk;
  };
  finalize_lowdin(ctx);
  return ctx;
}

BasisContext build_grid1d_backend(double half_width, int points,
                                  double softening, const Geometry& geom,
                                  double kinetic_factor) {
  if (half_width <= 0.0)
    throw InvalidGeometry("grid1d: half_width must be positive");
  if (points < 16) throw InvalidGeometry("grid1d: points must be >= 16");
  if (softening <= 0.0)
    throw InvalidGeometry("grid1d: softening must be positive");
  if (geom.electron_count < 1)
    throw InvalidGeometry("electron count must be >= 1");
  for (const Nucleus& nuc : geom.nuclei) {
    if (nuc.charge < 0.0)
      throw InvalidGeometry("grid1d: nuclear charge must be nonnegative");
    if (std::abs(nuc.position.x()) >= half_width)
      throw InvalidGeometry("grid1d: nucleus outside (-L, L)");
  }

  const int n = points;
  const double dx = 2.0 * half_width / (n + 1);
  Vec nodes(n);
  for (int p = 0; p < n; ++p) nodes(p) = -half_width + (p + 1) * dx;

  Mat t = Mat::Zero(n, n);
  const double w2 = kinetic_factor / (dx * dx);
  for (int p = 0; p < n; ++p) {
    t(p, p) = 2.0 * w2;
    if (p + 1 < n) {
      t(p, p + 1) = -w2;
      t(p + 1, p) = -w2;
    }
  }

  Mat h = t;
  const double a2 = softening * softening;
  for (int p = 0; p < n; ++p) {
    double vp = 0.0;
    for (const Nucleus& nuc : geom.nuclei) {
      const double d = nodes(p) - nuc.position.x();
      vp -= nuc.charge / std::sqrt(d * d + a2);
    }
    h(p, p) += vp;
  }

  auto kernel = std::make_shared<Mat>(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const double d = nodes(p) - nodes(q);
      (*kernel)(p, q) = 1.0 / std::sqrt(d * d + a2);
    }

  BasisContext ctx;
  ctx.dim = n;
  ctx.overlap = SymMatrix(Mat::Identity(n, n));
  ctx.kinetic = SymMatrix(t);
  ctx.core = SymMatrix(h);
  ctx.orthonormalizer = Mat::Identity(n, n);
  ctx.backend_tag = "grid1d";
  ctx.geometry = geom;
  ctx.grid_nodes = nodes;
  ctx.grid_spacing = dx;
  ctx.eri = [kernel, n, dx](const Mat& d) {
    JkPair jk{Mat::Zero(n, n), Mat::Zero(n, n)};
    Vec jd = (*kernel) * d.diagonal() * dx;
    jk.coulomb = jd.asDiagonal();
    jk.exchange = kernel->cwiseProduct(d) * dx;
    return jk;
  };
  finalize_lowdin(ctx);
  return ctx;
}

}  // namespace scflab
