#pragma once

#include "scflab/core.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace scflab {

struct Nucleus {
  double charge = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // grid1d reads x() only
};

struct Geometry {
  std::vector<Nucleus> nuclei;
  int electron_count = 1;
};

struct JkPair {
  Mat coulomb;
  Mat exchange;
};

// A Galerkin discretization. S, h, T and the two-electron contraction all
// live in the raw basis frame; the Lowdin images consumed by the engine are
// precomputed once at construction.
struct BasisContext {
  int dim = 0;
  SymMatrix overlap;
  SymMatrix core;
  SymMatrix kinetic;
  Mat orthonormalizer;  // X with X^T S X = I
  std::function<JkPair(const Mat&)> eri;
  std::string backend_tag;
  Geometry geometry;

  // grid1d metadata (empty for the gaussian backend)
  Vec grid_nodes;
  double grid_spacing = 0.0;

  SymMatrix core_lowdin;
  SymMatrix kinetic_lowdin;
};

// One contracted s-type function; coefficients refer to normalized
// primitives and the contraction is renormalized on assembly.
struct ContractedS {
  std::vector<double> exponents;
  std::vector<double> coefficients;
};

// element symbol -> list of contracted functions placed on each such atom
using BasisLibrary = std::map<std::string, std::vector<ContractedS>>;

// Plain-text basis data: "element exponent coefficient" per line; consecutive
// lines with the same element extend the open contraction, a blank line or a
// different element closes it. '#' starts a comment.
BasisLibrary load_basis_file(const std::filesystem::path& path);

// Resolve the contraction list for each nucleus (Z=1 -> H, Z=2 -> He).
std::vector<std::vector<ContractedS>> assign_contractions(
    const Geometry& geom, const BasisLibrary& lib);

// Minimal s-type Gaussian molecular backend. kinetic_factor scales the
// Laplacian: 1.0 gives -Delta, 0.5 the chemistry convention -Delta/2.
BasisContext build_gaussian_backend(
    const Geometry& geom,
    const std::vector<std::vector<ContractedS>>& contractions_per_atom,
    double kinetic_factor = 1.0);

// 1D soft-Coulomb grid backend on (-L, L) with n interior nodes; the basis is
// grid indicators scaled by 1/sqrt(dx), so S is the identity.
BasisContext build_grid1d_backend(double half_width, int points,
                                  double softening, const Geometry& geom,
                                  double kinetic_factor = 1.0);

}  // namespace scflab
