#pragma once

// Closed-system covariance propagation gamma(t) = E_t gamma0 E_t^T.
//
// The closed-form propagator and block formulas assume the resonant symmetric
// regime (nu1 == nu2 == nu, kappa1 == kappa2 == kappa, omega == nu - Omega).
// Block decompositions are reported in the ion-2-reflected frame
// (x2, p2 -> -x2, -p2): there the NEMS-ion blocks read (C, -C) and the
// ion-ion sector satisfies A_I = I - C_I.

#include "ionnems/model.hpp"
#include "ionnems/symplectic.hpp"

namespace ionnems {

enum class InitialKind { CoherentProduct, NemsThermal };

struct InitialState {
  InitialKind kind = InitialKind::CoherentProduct;
  double alpha = 1.0;  // 2 n + 1 of the NEMS thermal state; >= 1

  static InitialState coherent() { return {}; }
  static InitialState thermal(double alpha) { return {InitialKind::NemsThermal, alpha}; }

  /// I/2, or Diag(alpha, alpha, 1, 1, 1, 1)/2 for a thermal NEMS.
  CovarianceMatrix covariance() const;
};

struct PropagatorParams {
  double omega = 0.0;
  double kappa = 0.0;
  double omega_plus = 0.0;  // nu + Omega

  static PropagatorParams from(const SystemParams& s);  // requires resonance

  /// omega (kappa - omega); negative below the squeezing threshold.
  double omega_tilde_squared() const { return omega * (kappa - omega); }
  double omega_bar() const;
};

/// E_t from its closed-form matrix elements, mapped to interleaved ordering.
/// For kappa < omega the hyperbolic functions are continued to trigonometric
/// ones; kappa == omega uses their limits.
Matrix propagator_analytic(const PropagatorParams& p, double t);

/// exp(J H t).
Matrix propagator_numeric(const SystemParams& s, double t);

/// Closed-form propagator when s is resonant, exponential otherwise.
Matrix propagator(const SystemParams& s, double t);

/// E_t gamma0 E_t^T, symmetrized.
CovarianceMatrix evolve_closed(const CovarianceMatrix& gamma0, const SystemParams& s, double t);

/// evolve_closed from the thermal-NEMS product state. alpha < 1 is rejected.
CovarianceMatrix evolve_closed_thermal(double alpha, const SystemParams& s, double t);

/// Diag(1, 1, 1, 1, -1, -1): maps between the model frame and the block frame.
Matrix ion2_reflection();

struct BlockDecomposition {
  Matrix2 gamma_N;  // NEMS covariance
  Matrix2 A_I;      // twice a single ion's covariance
  Matrix2 C_I;      // twice the ion-ion correlation
  Matrix2 C;        // NEMS-ion 1 correlation (ion 2 carries -C)

  /// Full 6x6 covariance in the model frame.
  CovarianceMatrix assemble() const;

  /// Read the blocks off a 3-mode covariance (model frame).
  static BlockDecomposition from_covariance(const CovarianceMatrix& gamma);
};

enum class ThermalCase { ZeroT };

/// Blocks of gamma(t) from the coherent product state, via the closed-form
/// functions a(t), a'(t), b(t), b'(t), c(t), d(t).
BlockDecomposition closed_form_blocks(double omega, double kappa, double t,
                                      ThermalCase alpha_case = ThermalCase::ZeroT);

}  // namespace ionnems
