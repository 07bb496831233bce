#pragma once

// Mode-ordered symplectic linear algebra.
//
// Every phase-space matrix in this library uses the interleaved ordering
// (x0, p0, x1, p1, ..., x_{n-1}, p_{n-1}) with hbar = 1, so the vacuum
// covariance matrix is I/2.

#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

namespace ionnems {

using Matrix = Eigen::MatrixXd;
using Matrix2 = Eigen::Matrix2d;

class SymplecticForm {
 public:
  /// Block-diagonal J with n_modes copies of [[0, 1], [-1, 0]].
  explicit SymplecticForm(int n_modes);

  int n_modes() const noexcept { return n_modes_; }
  const Matrix& matrix() const noexcept { return matrix_; }

 private:
  int n_modes_;
  Matrix matrix_;
};

SymplecticForm symplectic_form(int n_modes);

/// Second-moment matrix of an n-mode Gaussian state.
///
/// Construction checks shape and symmetry (relative tolerance 1e-9); it does
/// not check the uncertainty relation, which callers query with
/// is_physical() because it costs an eigen-decomposition.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Matrix m);

  /// I/2 on n modes: a product of coherent states.
  static CovarianceMatrix vacuum(int n_modes);

  int n_modes() const noexcept { return static_cast<int>(m_.rows() / 2); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  /// Sub-covariance of the listed modes, in the listed order.
  CovarianceMatrix reduced(const std::vector<int>& modes) const;

  /// Smallest symplectic eigenvalue of 2*gamma (>= 1 for physical states).
  double min_symplectic_eigenvalue() const;

  /// All symplectic eigenvalues of 2*gamma are >= 1 - tol, where tol is
  /// widened by the double-precision noise floor eps * cond(2 gamma).
  bool is_physical(double tol = 1e-9) const;

 private:
  Matrix m_;
};

/// Subsystem B of a bipartite cut, given by its mode indices.
class Bipartition {
 public:
  Bipartition(std::initializer_list<int> side_b);
  explicit Bipartition(std::vector<int> side_b);

  const std::vector<int>& side_b() const noexcept { return side_b_; }
  bool contains(int mode) const;

  /// Throws InvalidArgument unless every index is < n_modes and the cut is proper.
  void validate_for(int n_modes) const;

  Bipartition complement(int n_modes) const;

 private:
  std::vector<int> side_b_;
};

/// e^M by scaling and squaring with a degree-13 Pade approximant.
Matrix matrix_exponential(const Matrix& m);

/// The n symplectic eigenvalues of a symmetric positive-definite 2n x 2n
/// matrix, ascending: moduli of the eigenvalues of J V, paired +/-. Computed
/// from the congruent antisymmetric L^T J L (V = L L^T) when V is positive
/// definite, from J V directly otherwise.
std::vector<double> symplectic_eigenvalues(const Matrix& v);

/// max |E^T J E - J| <= tol. False for non-square or odd-sized inputs.
bool is_symplectic(const Matrix& e, double tol);

/// P gamma P with P flipping the momentum of every mode on side B.
CovarianceMatrix partial_transpose(const CovarianceMatrix& gamma, const Bipartition& part);

/// (M + M^T) / 2.
Matrix symmetrized(const Matrix& m);

/// Largest absolute entry.
inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace ionnems
