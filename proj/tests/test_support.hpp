#pragma once

// Test-only oracles and helpers, independent of the library's own routes.

#include <cmath>
#include <random>

#include "ionnems/model.hpp"
#include "ionnems/symplectic.hpp"

namespace testing {

using ionnems::Matrix;

/// e^M by a plain Taylor series in long double with scaling and squaring.
inline Matrix taylor_expm(const Matrix& m) {
  using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::ldexp(1.0, squarings) > 0.25) ++squarings;
  const LMat a = m.cast<long double>() / std::ldexp(1.0L, squarings);
  LMat term = LMat::Identity(m.rows(), m.cols());
  LMat sum = term;
  for (int k = 1; k < 40; ++k) {
    term = term * a / static_cast<long double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum.cast<double>();
}

/// Two-mode squeezed vacuum with squeezing r (hbar = 1, vacuum I/2).
inline Matrix two_mode_squeezed(double r) {
  const double c = std::cosh(2.0 * r) / 2.0;
  const double s = std::sinh(2.0 * r) / 2.0;
  Matrix g = Matrix::Zero(4, 4);
  g(0, 0) = g(1, 1) = g(2, 2) = g(3, 3) = c;
  g(0, 2) = g(2, 0) = s;
  g(1, 3) = g(3, 1) = -s;
  return g;
}

inline Matrix random_symmetric(std::mt19937& rng, int dim, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = n(rng);
  return 0.5 * (m + m.transpose());
}

/// exp(J H) for a random symmetric H: a random symplectic matrix.
inline Matrix random_symplectic(std::mt19937& rng, int n_modes, double scale) {
  const Matrix j = ionnems::SymplecticForm(n_modes).matrix();
  return taylor_expm(j * random_symmetric(rng, 2 * n_modes, scale));
}

/// Random valid symmetric-ion parameters.
inline ionnems::SystemParams random_symmetric_params(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::uniform_real_distribution<double> k(0.0, 4.0);
  ionnems::SystemParams s;
  s.omega = u(rng);
  s.nu1 = s.nu2 = u(rng) + 0.1;
  s.Omega = std::uniform_real_distribution<double>(0.0, 0.9)(rng) * s.nu1;
  s.kappa1 = s.kappa2 = k(rng);
  return s;
}

/// Swap modes a and b of a 2n x 2n phase-space matrix.
inline Matrix swap_modes(const Matrix& g, int a, int b) {
  Matrix p = Matrix::Identity(g.rows(), g.cols());
  p.block(2 * a, 2 * a, 2, 2).setZero();
  p.block(2 * b, 2 * b, 2, 2).setZero();
  p.block(2 * a, 2 * b, 2, 2).setIdentity();
  p.block(2 * b, 2 * a, 2, 2).setIdentity();
  return p * g * p.transpose();
}

}  // namespace testing
