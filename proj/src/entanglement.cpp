#include "ionnems/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "ionnems/errors.hpp"

namespace ionnems {

namespace {

double clipped_log(double mu) { return mu >= 1.0 - kNegativityClip ? 0.0 : -std::log(mu); }

Eigen::Vector2d sorted_eigenvalues(const Matrix2& m) {
  const Matrix2 s = 0.5 * (m + m.transpose());
  return Eigen::SelfAdjointEigenSolver<Matrix2>(s, Eigen::EigenvaluesOnly).eigenvalues();
}

double mu_from_radicand(double r, const char* who) {
  if (r < -1e-9) {
    throw InvalidArgument(std::string(who) + ": block violates the local-measurement identity (radicand " +
                          std::to_string(r) + ")");
  }
  return std::sqrt(std::max(0.0, r));
}

}  // namespace

double log_negativity(const CovarianceMatrix& gamma, const Bipartition& part) {
  part.validate_for(gamma.n_modes());
  if (!gamma.is_physical()) throw InvalidArgument("log_negativity: covariance violates the uncertainty relation");
  const CovarianceMatrix pt = partial_transpose(gamma, part);
  double n = 0.0;
  for (double mu : symplectic_eigenvalues(2.0 * pt.matrix())) n += clipped_log(mu);
  return n;
}

double tripartite_min_negativity(const CovarianceMatrix& gamma) {
  if (gamma.n_modes() != 3) throw InvalidArgument("tripartite_min_negativity: expected 3 modes");
  return std::min({log_negativity(gamma, {1, 2}), log_negativity(gamma, {0, 2}),
                   log_negativity(gamma, {0, 1})});
}

double ion_ion_negativity_local(const Matrix2& A_I) {
  if (!A_I.allFinite()) throw InvalidArgument("ion_ion_negativity_local: non-finite block");
  const double lmin = sorted_eigenvalues(A_I)(0);
  return clipped_log(mu_from_radicand(2.0 * lmin - 1.0, "ion_ion_negativity_local"));
}

double ion_ion_negativity_from_correlation(const Matrix2& C_I) {
  if (!C_I.allFinite()) throw InvalidArgument("ion_ion_negativity_from_correlation: non-finite block");
  const double lmax = sorted_eigenvalues(C_I)(1);
  return clipped_log(mu_from_radicand(1.0 - 2.0 * lmax, "ion_ion_negativity_from_correlation"));
}

bool separability_check(const CovarianceMatrix& gamma, const Bipartition& part) {
  const CovarianceMatrix pt = partial_transpose(gamma, part);
  return symplectic_eigenvalues(2.0 * pt.matrix()).front() >= 1.0 - kNegativityClip;
}

NegativityPoint NegativityPoint::measure(const CovarianceMatrix& gamma) {
  if (gamma.n_modes() != 3) throw InvalidArgument("NegativityPoint::measure: expected 3 modes");
  NegativityPoint p;
  p.N12 = log_negativity(gamma.reduced({1, 2}), {1});
  p.N01 = log_negativity(gamma.reduced({0, 1}), {1});
  p.N0_12 = log_negativity(gamma, {1, 2});
  p.N1_02 = log_negativity(gamma, {0, 2});
  p.N2_01 = log_negativity(gamma, {0, 1});
  p.tau = std::min({p.N0_12, p.N1_02, p.N2_01});
  return p;
}

std::vector<double> NegativityTrajectory::column(double NegativityPoint::*field) const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.*field);
  return out;
}

}  // namespace ionnems
