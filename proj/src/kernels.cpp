#include "ionnems/kernels.hpp"

#include <cmath>
#include <exception>
#include <optional>

#include "ionnems/errors.hpp"

namespace ionnems {

namespace {

// Runs body(k) for k in [0, n) on the OpenMP team; the first exception thrown
// by any iteration is rethrown on the calling thread.
template <class Body>
void parallel_for(long n, Body body) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (long k = 0; k < n; ++k) {
    try {
      body(k);
    } catch (...) {
#pragma omp critical(ionnems_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void require_same_length(const std::vector<double>& t, const std::vector<CovarianceMatrix>& g) {
  if (t.size() != g.size()) throw InvalidArgument("measure_trajectory: times and states differ in length");
}

double nems_purity(const CovarianceMatrix& g) {
  const Matrix2 n = 2.0 * g.matrix().block<2, 2>(0, 0);
  return 1.0 / std::sqrt(n.determinant());
}

}  // namespace

std::vector<double> uniform_grid(double t_max, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("uniform_grid: dt must be finite and > 0");
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw InvalidArgument("uniform_grid: t_max must be finite and >= 0");
  const double steps = t_max / dt;
  auto n = static_cast<long>(std::floor(steps + 1e-9));
  std::vector<double> t(n + 1);
  for (long k = 0; k <= n; ++k) t[k] = static_cast<double>(k) * dt;
  if (std::abs(t.back() - t_max) <= 1e-9 * dt) t.back() = t_max;
  return t;
}

std::vector<CovarianceMatrix> closed_covariances_serial(const CovarianceMatrix& gamma0, const SystemParams& s,
                                                        const std::vector<double>& times) {
  std::vector<CovarianceMatrix> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(evolve_closed(gamma0, s, t));
  return out;
}

std::vector<CovarianceMatrix> closed_covariances_parallel(const CovarianceMatrix& gamma0, const SystemParams& s,
                                                          const std::vector<double>& times) {
  std::vector<std::optional<CovarianceMatrix>> slots(times.size());
  parallel_for(static_cast<long>(times.size()), [&](long k) { slots[k] = evolve_closed(gamma0, s, times[k]); });
  std::vector<CovarianceMatrix> out;
  out.reserve(times.size());
  for (auto& g : slots) out.push_back(std::move(*g));
  return out;
}

NegativityTrajectory measure_trajectory_serial(const std::vector<double>& times,
                                               const std::vector<CovarianceMatrix>& gammas) {
  require_same_length(times, gammas);
  NegativityTrajectory out;
  out.times = times;
  out.points.reserve(gammas.size());
  for (const auto& g : gammas) out.points.push_back(NegativityPoint::measure(g));
  return out;
}

NegativityTrajectory measure_trajectory_parallel(const std::vector<double>& times,
                                                 const std::vector<CovarianceMatrix>& gammas) {
  require_same_length(times, gammas);
  NegativityTrajectory out;
  out.times = times;
  out.points.resize(gammas.size());
  parallel_for(static_cast<long>(gammas.size()),
               [&](long k) { out.points[k] = NegativityPoint::measure(gammas[k]); });
  return out;
}

StateDiagnostics state_diagnostics_parallel(const std::vector<CovarianceMatrix>& gammas) {
  StateDiagnostics d;
  d.min_symplectic_eig.resize(gammas.size());
  d.purity_nems.resize(gammas.size());
  parallel_for(static_cast<long>(gammas.size()), [&](long k) {
    d.min_symplectic_eig[k] = gammas[k].min_symplectic_eigenvalue();
    d.purity_nems[k] = nems_purity(gammas[k]);
  });
  return d;
}

}  // namespace ionnems
