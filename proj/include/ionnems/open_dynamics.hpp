#pragma once

// Linear-Lindblad covariance dynamics d gamma/dt = G gamma + gamma G^T + D,
// with G = J (H - Im Y), D = Re Y and Y = sum_k l_k l_k^dagger.

#include <vector>

#include <Eigen/Dense>

#include "ionnems/model.hpp"
#include "ionnems/symplectic.hpp"

namespace ionnems {

struct BathParams {
  double zeta = 0.0;   // NEMS damping rate
  double n_bar = 0.0;  // reservoir occupation

  void validate() const;
};

struct LindbladSpec {
  std::vector<Eigen::VectorXcd> vectors;
};

struct DriftDiffusion {
  Matrix Gamma;
  Matrix D;
};

/// Amplitude damping of the NEMS into a thermal reservoir: a decay vector
/// with weight zeta (n_bar + 1) and a pumping vector with weight zeta n_bar.
LindbladSpec nems_damping_lindblads(const BathParams& b);

DriftDiffusion drift_and_diffusion(const SystemParams& s, const LindbladSpec& l);

/// Convenience: drift_and_diffusion(s, nems_damping_lindblads(b)).
DriftDiffusion nems_damped(const SystemParams& s, const BathParams& b);

struct OdeOptions {
  double max_step = 1e-3;     // RK4 step cap; the step is also <= grid spacing / 10
  double agreement = 1e-8;    // relative halving agreement per grid interval
  int max_halvings = 12;
};

/// gamma at every point of t_grid (ascending, starting at 0) by classical RK4.
/// Each grid interval is integrated with n and 2n steps; n doubles until the
/// two agree. Throws NumericalError (with the time) on failure.
std::vector<CovarianceMatrix> evolve_open(const CovarianceMatrix& gamma0, const DriftDiffusion& dd,
                                          const std::vector<double>& t_grid,
                                          const OdeOptions& opt = {});

/// e^{Gt} gamma0 e^{G^T t} + int_0^t e^{Gs} D e^{G^T s} ds with the integral by
/// adaptive Gauss-Kronrod (7, 15) quadrature to absolute tolerance abs_tol.
CovarianceMatrix evolve_open_quadrature(const CovarianceMatrix& gamma0, const DriftDiffusion& dd,
                                        double t, double abs_tol = 1e-9);

struct SteadyState {
  std::vector<int> modes;  // damped modes and everything coupled to them
  CovarianceMatrix X;      // steady covariance on those modes
};

/// Solves G X + X G^T + D = 0 restricted to the modes reachable from the
/// dissipative ones. Undamped decoupled modes (which keep their initial
/// covariance forever) are excluded. Throws NoSteadyState when nothing is
/// damped or the restricted drift is not Hurwitz.
SteadyState steady_state(const DriftDiffusion& dd);

}  // namespace ionnems
