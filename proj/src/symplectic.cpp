#include "ionnems/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "ionnems/errors.hpp"

namespace ionnems {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kPairingTol = 1e-8;

void require_even_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0) {
    throw InvalidArgument(std::string(who) + ": expected a non-empty 2n x 2n matrix, got " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

bool nearly_symmetric(const Matrix& m) {
  return max_abs(m - m.transpose()) <= kSymmetryTol * std::max(1.0, max_abs(m));
}

}  // namespace

SymplecticForm::SymplecticForm(int n_modes) : n_modes_(n_modes) {
  if (n_modes < 1) {
    throw InvalidArgument("symplectic_form: n_modes must be >= 1");
  }
  matrix_ = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    matrix_(2 * k, 2 * k + 1) = 1.0;
    matrix_(2 * k + 1, 2 * k) = -1.0;
  }
}

SymplecticForm symplectic_form(int n_modes) { return SymplecticForm(n_modes); }

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// ---------------------------------------------------------------------------
// CovarianceMatrix

CovarianceMatrix::CovarianceMatrix(Matrix m) : m_(std::move(m)) {
  require_even_square(m_, "CovarianceMatrix");
  if (!m_.allFinite()) {
    throw InvalidArgument("CovarianceMatrix: non-finite entry");
  }
  if (!nearly_symmetric(m_)) {
    throw InvalidArgument("CovarianceMatrix: matrix is not symmetric");
  }
}

CovarianceMatrix CovarianceMatrix::vacuum(int n_modes) {
  if (n_modes < 1) throw InvalidArgument("CovarianceMatrix::vacuum: n_modes must be >= 1");
  return CovarianceMatrix(0.5 * Matrix::Identity(2 * n_modes, 2 * n_modes));
}

CovarianceMatrix CovarianceMatrix::reduced(const std::vector<int>& modes) const {
  if (modes.empty()) throw InvalidArgument("reduced: empty mode list");
  const int n = n_modes();
  std::vector<Eigen::Index> idx;
  idx.reserve(2 * modes.size());
  for (int mode : modes) {
    if (mode < 0 || mode >= n) {
      throw InvalidArgument("reduced: mode index " + std::to_string(mode) + " out of range");
    }
    idx.push_back(2 * mode);
    idx.push_back(2 * mode + 1);
  }
  return CovarianceMatrix(m_(idx, idx));
}

double CovarianceMatrix::min_symplectic_eigenvalue() const {
  return symplectic_eigenvalues(2.0 * m_).front();
}

bool CovarianceMatrix::is_physical(double tol) const {
  // Rounding gamma at relative eps moves its symplectic eigenvalues by about
  // eps * cond(gamma), which for squeezed pure states is eps * |gamma|^2.
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Matrix>(2.0 * m_, Eigen::EigenvaluesOnly).eigenvalues();
  const double resolution = 64.0 * std::numeric_limits<double>::epsilon() * ev(ev.size() - 1);
  if (ev(0) < -resolution) return false;
  // Beyond cond ~ 1 / (64 eps) the test cannot resolve anything.
  const double floor = resolution / std::max(ev(0), resolution);
  return min_symplectic_eigenvalue() >= 1.0 - tol - floor;
}

// ---------------------------------------------------------------------------
// Bipartition

Bipartition::Bipartition(std::initializer_list<int> side_b)
    : Bipartition(std::vector<int>(side_b)) {}

Bipartition::Bipartition(std::vector<int> side_b) : side_b_(std::move(side_b)) {
  if (side_b_.empty()) throw InvalidArgument("Bipartition: side B must be non-empty");
  std::vector<int> sorted = side_b_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidArgument("Bipartition: duplicate mode index");
  }
  if (sorted.front() < 0) throw InvalidArgument("Bipartition: negative mode index");
  side_b_ = std::move(sorted);
}

bool Bipartition::contains(int mode) const {
  return std::binary_search(side_b_.begin(), side_b_.end(), mode);
}

void Bipartition::validate_for(int n_modes) const {
  if (side_b_.back() >= n_modes) {
    throw InvalidArgument("Bipartition: mode index " + std::to_string(side_b_.back()) +
                          " out of range for " + std::to_string(n_modes) + " modes");
  }
  if (static_cast<int>(side_b_.size()) >= n_modes) {
    throw InvalidArgument("Bipartition: side B must be a proper subset of the modes");
  }
}

Bipartition Bipartition::complement(int n_modes) const {
  validate_for(n_modes);
  std::vector<int> rest;
  for (int k = 0; k < n_modes; ++k) {
    if (!contains(k)) rest.push_back(k);
  }
  return Bipartition(std::move(rest));
}

// ---------------------------------------------------------------------------
// Free functions

Matrix matrix_exponential(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("matrix_exponential: matrix must be square");
  if (!m.allFinite()) throw InvalidArgument("matrix_exponential: non-finite entry");
  Matrix result = m.exp();
  if (!result.allFinite()) {
    throw NumericalError("matrix_exponential: result overflowed");
  }
  return result;
}

std::vector<double> symplectic_eigenvalues(const Matrix& v) {
  require_even_square(v, "symplectic_eigenvalues");
  if (!v.allFinite()) throw InvalidArgument("symplectic_eigenvalues: non-finite entry");
  if (!nearly_symmetric(v)) throw InvalidArgument("symplectic_eigenvalues: matrix is not symmetric");

  const int n = static_cast<int>(v.rows() / 2);
  const Matrix j = SymplecticForm(n).matrix();
  std::vector<double> moduli(2 * n);

  // With V = L L^T, L^T J L is similar to J V but antisymmetric, hence normal:
  // its singular values are the moduli |i nu| with error ~eps |V| instead of
  // the ~eps |V|^2 of the non-normal J V.
  Eigen::LLT<Matrix> llt(symmetrized(v));
  if (llt.info() == Eigen::Success) {
    const Matrix l = llt.matrixL();
    const Matrix a = l.transpose() * j * l;
    Eigen::JacobiSVD<Matrix> svd(a);
    for (int k = 0; k < 2 * n; ++k) moduli[k] = svd.singularValues()(k);
  } else {
    Eigen::EigenSolver<Matrix> solver(j * v, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("symplectic_eigenvalues: eigen-solver did not converge");
    }
    for (int k = 0; k < 2 * n; ++k) moduli[k] = std::abs(solver.eigenvalues()[k]);
  }
  std::stable_sort(moduli.begin(), moduli.end());

  // Eigenvalues of J V come in +/- i nu pairs; after sorting by modulus each
  // consecutive pair must match.
  const double tol = kPairingTol * std::max(1.0, max_abs(v));
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    const double a = moduli[2 * k];
    const double b = moduli[2 * k + 1];
    if (std::abs(a - b) > tol) {
      throw NumericalError("symplectic_eigenvalues: unpaired eigenvalue moduli " +
                           std::to_string(a) + " and " + std::to_string(b));
    }
    out[k] = 0.5 * (a + b);
  }
  return out;
}

bool is_symplectic(const Matrix& e, double tol) {
  if (e.rows() != e.cols() || e.rows() == 0 || e.rows() % 2 != 0) return false;
  const Matrix j = SymplecticForm(static_cast<int>(e.rows() / 2)).matrix();
  return max_abs(e.transpose() * j * e - j) <= tol;
}

CovarianceMatrix partial_transpose(const CovarianceMatrix& gamma, const Bipartition& part) {
  part.validate_for(gamma.n_modes());
  Matrix m = gamma.matrix();
  for (int mode : part.side_b()) {
    const Eigen::Index p = 2 * mode + 1;
    m.row(p) *= -1.0;
    m.col(p) *= -1.0;
  }
  return CovarianceMatrix(std::move(m));
}

}  // namespace ionnems
