#pragma once

// Logarithmic negativity (natural log) of Gaussian states:
//   N = -sum_j ln min(1, mu_j)
// over the n symplectic eigenvalues mu_j of 2 * gamma^{T_B}. Eigenvalues within
// 1e-10 of 1 count as 1. A two-mode squeezed vacuum with squeezing r has N = 2r.

#include <vector>

#include "ionnems/symplectic.hpp"

namespace ionnems {

inline constexpr double kNegativityClip = 1e-10;

double log_negativity(const CovarianceMatrix& gamma, const Bipartition& part);

/// min(N_{0|12}, N_{1|02}, N_{2|01}) of a 3-mode state.
double tripartite_min_negativity(const CovarianceMatrix& gamma);

/// Ion-ion negativity from the single-ion block A_I of a state with
/// A_I = I - C_I: the relevant partially transposed symplectic eigenvalue is
/// sqrt(2 lambda_min(A_I) - 1).
double ion_ion_negativity_local(const Matrix2& A_I);

/// Same quantity from the ion-ion correlation block: sqrt(1 - 2 lambda_max(C_I)).
double ion_ion_negativity_from_correlation(const Matrix2& C_I);

/// Smallest symplectic eigenvalue of 2 * gamma^{T_B} is >= 1 - 1e-10.
bool separability_check(const CovarianceMatrix& gamma, const Bipartition& part);

/// Every negativity reported along a 3-mode trajectory.
struct NegativityPoint {
  double N12 = 0.0;    // ion-ion, from the reduced two-ion state
  double N01 = 0.0;    // NEMS-ion 1, from the reduced two-mode state
  double N0_12 = 0.0;  // NEMS vs both ions
  double N1_02 = 0.0;
  double N2_01 = 0.0;
  double tau = 0.0;    // min of the three one-vs-two values

  static NegativityPoint measure(const CovarianceMatrix& gamma);
};

struct NegativityTrajectory {
  std::vector<double> times;
  std::vector<NegativityPoint> points;

  std::size_t size() const noexcept { return times.size(); }
  std::vector<double> column(double NegativityPoint::*field) const;
};

}  // namespace ionnems
