#pragma once

// Ion-NEMS-ion Hamiltonian: one nanomechanical mode (mode 0) coupled in
// position to two trapped-ion modes (1, 2), which also share a weak
// beam-splitter coupling. All frequencies share one angular unit; hbar = 1.

#include <array>
#include <complex>
#include <string_view>

#include "ionnems/symplectic.hpp"

namespace ionnems {

struct SystemParams {
  double omega = 0.0;   // NEMS frequency
  double nu1 = 0.0;     // ion trap frequencies
  double nu2 = 0.0;
  double Omega = 0.0;   // ion-ion beam-splitter coupling
  double kappa1 = 0.0;  // ion-NEMS couplings
  double kappa2 = 0.0;

  /// omega, nu_i > 0; kappa_i, Omega >= 0; Omega < min(nu1, nu2).
  void validate() const;

  /// Symmetric ions tuned to omega = nu - Omega.
  static SystemParams resonant(double omega, double kappa, double Omega);

  bool is_symmetric(double tol = 1e-12) const;
  bool is_resonant(double tol = 1e-12) const;  // symmetric and omega == nu - Omega
};

struct PhysicalCoupling {
  double coulomb_k = 0.0;  // N m^2 / C^2
  double charge_e = 0.0;   // C
  double C0 = 0.0;         // F
  double V0 = 0.0;         // V
  double d = 0.0;          // m
  double m = 0.0;          // ion mass, kg
  double M = 0.0;          // NEMS mass, kg
  double nu = 0.0;         // ion trap angular frequency, 1/s
  double omega = 0.0;      // NEMS angular frequency, 1/s
};

/// kappa = chi / sqrt(m M nu omega) with chi = 2 k e C0 V0 / d^3.
double coupling_constant(const PhysicalCoupling& p);

/// 6x6 matrix H with H_hat = R^T H R / 2 (the constant energy offset is dropped).
Matrix hamiltonian_matrix(const SystemParams& s);

/// J H, whose exponential propagates the closed-system phase space.
Matrix dynamics_generator(const SystemParams& s);

enum class DynamicsKind { Rotational, Mixed };

std::string_view to_string(DynamicsKind kind);

struct SpectrumClassification {
  /// Ordered as (eta+, eta-, pi+, pi-, rho+, rho-) on the analytic branch;
  /// sorted by (imag, real) on the numeric one.
  std::array<std::complex<double>, 6> eigenvalues;
  DynamicsKind kind = DynamicsKind::Rotational;
  /// sqrt(omega (nu - Omega)), the coupling above which squeezing appears.
  double threshold = 0.0;
  bool analytic = false;
};

/// Closed-form eigenvalues of J H for symmetric ions. Throws InvalidArgument
/// for asymmetric parameters.
SpectrumClassification analytic_spectrum(const SystemParams& s);

/// Eigenvalues of J H from a dense eigen-solver; Mixed iff max Re > 1e-10.
SpectrumClassification numeric_spectrum(const SystemParams& s);

/// Analytic branch for symmetric ions, numeric otherwise.
SpectrumClassification spectrum(const SystemParams& s);

}  // namespace ionnems
