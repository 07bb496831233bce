#pragma once

// Trajectory kernels over a time grid. Each has a serial reference and an
// OpenMP version; both produce bit-identical results because every time point
// is computed independently.

#include <vector>

#include "ionnems/closed_dynamics.hpp"
#include "ionnems/entanglement.hpp"
#include "ionnems/model.hpp"
#include "ionnems/symplectic.hpp"

namespace ionnems {

/// 0, dt, 2 dt, ..., up to t_max (the last point snaps to t_max when it is
/// within 1e-9 dt of it).
std::vector<double> uniform_grid(double t_max, double dt);

std::vector<CovarianceMatrix> closed_covariances_serial(const CovarianceMatrix& gamma0, const SystemParams& s,
                                                        const std::vector<double>& times);
std::vector<CovarianceMatrix> closed_covariances_parallel(const CovarianceMatrix& gamma0, const SystemParams& s,
                                                          const std::vector<double>& times);

NegativityTrajectory measure_trajectory_serial(const std::vector<double>& times,
                                               const std::vector<CovarianceMatrix>& gammas);
NegativityTrajectory measure_trajectory_parallel(const std::vector<double>& times,
                                                 const std::vector<CovarianceMatrix>& gammas);

/// Smallest symplectic eigenvalue of 2 gamma and NEMS purity 1 / sqrt(det 2 gamma_N)
/// at every point.
struct StateDiagnostics {
  std::vector<double> min_symplectic_eig;
  std::vector<double> purity_nems;
};
StateDiagnostics state_diagnostics_parallel(const std::vector<CovarianceMatrix>& gammas);

}  // namespace ionnems
