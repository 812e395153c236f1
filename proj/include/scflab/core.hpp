#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace scflab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Eigen::Index;

// Iterative kernel failed to reach its tolerance (carries the residual reached).
class NumericFailure : public std::runtime_error {
public:
  NumericFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

// Overlap matrix is numerically singular; the basis set is rejected.
class NearLinearDependence : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class InvalidOrbitals : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class InvalidInput : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config parse/validation failure; line < 0 means "not tied to a line".
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& what, long line = -1)
      : std::runtime_error(what), line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

// Square matrix kept exactly symmetric: entry (i,j) and (j,i) are the same double.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(const Mat& a) {
    if (a.rows() != a.cols())
      throw std::invalid_argument("SymMatrix: matrix must be square");
    m_ = 0.5 * (a + a.transpose());
  }

  const Mat& mat() const { return m_; }
  operator const Mat&() const { return m_; }
  Index dim() const { return m_.rows(); }

private:
  Mat m_;
};

}  // namespace scflab
