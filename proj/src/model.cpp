#include "ionnems/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ionnems/errors.hpp"

namespace ionnems {

namespace {

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Sorted for reproducible output: by imaginary part, then real part.
void sort_eigenvalues(std::array<std::complex<double>, 6>& ev) {
  std::stable_sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
    if (a.imag() != b.imag()) return a.imag() < b.imag();
    return a.real() < b.real();
  });
}

}  // namespace

void SystemParams::validate() const {
  const bool finite = std::isfinite(omega) && std::isfinite(nu1) && std::isfinite(nu2) &&
                      std::isfinite(Omega) && std::isfinite(kappa1) && std::isfinite(kappa2);
  if (!finite) throw InvalidArgument("SystemParams: non-finite parameter");
  if (!(omega > 0.0)) throw InvalidArgument("SystemParams: omega must be > 0");
  if (!(nu1 > 0.0) || !(nu2 > 0.0)) throw InvalidArgument("SystemParams: nu1, nu2 must be > 0");
  if (kappa1 < 0.0 || kappa2 < 0.0) throw InvalidArgument("SystemParams: kappa1, kappa2 must be >= 0");
  if (Omega < 0.0) throw InvalidArgument("SystemParams: Omega must be >= 0");
  if (!(Omega < std::min(nu1, nu2))) throw InvalidArgument("SystemParams: Omega must be < min(nu1, nu2)");
}

SystemParams SystemParams::resonant(double omega, double kappa, double Omega) {
  SystemParams s{omega, omega + Omega, omega + Omega, Omega, kappa, kappa};
  s.validate();
  return s;
}

bool SystemParams::is_symmetric(double tol) const {
  return close(nu1, nu2, tol) && close(kappa1, kappa2, tol);
}

bool SystemParams::is_resonant(double tol) const {
  return is_symmetric(tol) && close(omega, nu1 - Omega, tol);
}

double coupling_constant(const PhysicalCoupling& p) {
  const double fields[] = {p.coulomb_k, p.charge_e, p.C0, p.V0, p.d, p.m, p.M, p.nu, p.omega};
  for (double f : fields) {
    if (!std::isfinite(f) || !(f > 0.0)) {
      throw InvalidArgument("coupling_constant: every physical parameter must be finite and > 0");
    }
  }
  const double chi = 2.0 * p.coulomb_k * p.charge_e * p.C0 * p.V0 / (p.d * p.d * p.d);
  return chi / std::sqrt(p.m * p.M * p.nu * p.omega);
}

Matrix hamiltonian_matrix(const SystemParams& s) {
  s.validate();
  const double r2 = std::sqrt(2.0);
  // Position (U) and momentum (T) quadratic forms over modes (NEMS, ion 1, ion 2).
  Eigen::Matrix3d u;
  u << s.omega, -s.kappa1 / r2, -s.kappa2 / r2,
       -s.kappa1 / r2, s.nu1, -s.Omega,
       -s.kappa2 / r2, -s.Omega, s.nu2;
  Eigen::Matrix3d t;
  t << s.omega, 0.0, 0.0,
       0.0, s.nu1, -s.Omega,
       0.0, -s.Omega, s.nu2;

  Matrix h = Matrix::Zero(6, 6);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      h(2 * i, 2 * j) = u(i, j);
      h(2 * i + 1, 2 * j + 1) = t(i, j);
    }
  }
  return h;
}

Matrix dynamics_generator(const SystemParams& s) {
  return SymplecticForm(3).matrix() * hamiltonian_matrix(s);
}

std::string_view to_string(DynamicsKind kind) {
  return kind == DynamicsKind::Mixed ? "Mixed" : "Rotational";
}

SpectrumClassification analytic_spectrum(const SystemParams& s) {
  s.validate();
  if (!s.is_symmetric()) {
    throw InvalidArgument("analytic_spectrum: requires nu1 == nu2 and kappa1 == kappa2");
  }
  const double w = s.omega;
  const double nu = s.nu1;
  const double kappa = s.kappa1;
  const double w_plus = nu + s.Omega;
  const double w_minus = nu - s.Omega;

  // The NEMS couples only to the symmetric ion mode (frequency w_minus, strength
  // kappa); the antisymmetric mode rotates freely at w_plus.
  const double mean = 0.5 * (w * w + w_minus * w_minus);
  const double split =
      0.5 * std::sqrt(std::pow(w * w - w_minus * w_minus, 2) + 4.0 * kappa * kappa * w * w_minus);
  const double pi_sq = mean + split;   // squared rotation frequency
  const double rho_sq = mean - split;  // negative above threshold

  SpectrumClassification out;
  out.analytic = true;
  out.threshold = std::sqrt(w * w_minus);
  const std::complex<double> i(0.0, 1.0);
  out.eigenvalues[0] = i * w_plus;
  out.eigenvalues[1] = -i * w_plus;
  out.eigenvalues[2] = i * std::sqrt(pi_sq);
  out.eigenvalues[3] = -i * std::sqrt(pi_sq);
  if (rho_sq >= 0.0) {
    out.eigenvalues[4] = i * std::sqrt(rho_sq);
    out.eigenvalues[5] = -i * std::sqrt(rho_sq);
  } else {
    out.eigenvalues[4] = std::sqrt(-rho_sq);
    out.eigenvalues[5] = -std::sqrt(-rho_sq);
  }
  // Boundary kappa == threshold (double zero) counts as rotational.
  out.kind = kappa > out.threshold ? DynamicsKind::Mixed : DynamicsKind::Rotational;
  return out;
}

SpectrumClassification numeric_spectrum(const SystemParams& s) {
  const Matrix gen = dynamics_generator(s);
  Eigen::EigenSolver<Matrix> solver(gen, false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("numeric_spectrum: eigen-solver did not converge");
  }
  SpectrumClassification out;
  double max_real = 0.0;
  for (int k = 0; k < 6; ++k) {
    out.eigenvalues[k] = solver.eigenvalues()[k];
    max_real = std::max(max_real, out.eigenvalues[k].real());
  }
  sort_eigenvalues(out.eigenvalues);
  out.threshold = std::sqrt(s.omega * std::max(0.0, std::min(s.nu1, s.nu2) - s.Omega));
  out.kind = max_real > 1e-10 ? DynamicsKind::Mixed : DynamicsKind::Rotational;
  return out;
}

SpectrumClassification spectrum(const SystemParams& s) {
  s.validate();
  return s.is_symmetric() ? analytic_spectrum(s) : numeric_spectrum(s);
}

}  // namespace ionnems
