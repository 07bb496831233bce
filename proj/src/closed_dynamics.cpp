#include "ionnems/closed_dynamics.hpp"

#include <array>
#include <cmath>
#include <string>

#include "ionnems/errors.hpp"

namespace ionnems {

namespace {

// cosh(w t), sinh(w t)/w and w sinh(w t) as entire functions of s = w^2, so
// that s < 0 gives cos, sin/|w|, -|w| sin and s == 0 gives 1, t, 0.
struct HyperbolicKernel {
  double s;

  double cosh_like(double t) const {
    const double x = s * t * t;
    if (std::abs(x) < 1e-6) return 1.0 + x / 2.0 + x * x / 24.0 + x * x * x / 720.0;
    const double r = std::sqrt(std::abs(s));
    return s > 0.0 ? std::cosh(r * t) : std::cos(r * t);
  }

  double sinhc(double t) const {
    const double x = s * t * t;
    if (std::abs(x) < 1e-6) return t * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
    const double r = std::sqrt(std::abs(s));
    return s > 0.0 ? std::sinh(r * t) / r : std::sin(r * t) / r;
  }

  double w_sinh(double t) const { return s * sinhc(t); }

  double sinh_squared(double t) const {
    const double sc = sinhc(t);
    return s * sc * sc;
  }
};

void require_finite_time(double t, const char* who) {
  if (!std::isfinite(t)) throw InvalidArgument(std::string(who) + ": non-finite time");
}

}  // namespace

CovarianceMatrix InitialState::covariance() const {
  if (kind == InitialKind::CoherentProduct) return CovarianceMatrix::vacuum(3);
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("InitialState: alpha must be finite and >= 1");
  }
  Eigen::VectorXd diag(6);
  diag << alpha, alpha, 1.0, 1.0, 1.0, 1.0;
  return CovarianceMatrix(Matrix(0.5 * diag.asDiagonal()));
}

PropagatorParams PropagatorParams::from(const SystemParams& s) {
  s.validate();
  if (!s.is_resonant()) {
    throw InvalidArgument("PropagatorParams: requires symmetric ions with omega == nu - Omega");
  }
  return {s.omega, s.kappa1, s.nu1 + s.Omega};
}

double PropagatorParams::omega_bar() const { return std::sqrt(omega * (kappa + omega)); }

Matrix ion2_reflection() {
  Eigen::VectorXd d(6);
  d << 1.0, 1.0, 1.0, 1.0, -1.0, -1.0;
  return d.asDiagonal();
}

Matrix propagator_analytic(const PropagatorParams& p, double t) {
  require_finite_time(t, "propagator_analytic");
  if (!(p.omega > 0.0) || p.kappa < 0.0) {
    throw InvalidArgument("propagator_analytic: need omega > 0 and kappa >= 0");
  }
  const double w = p.omega;
  const double wb = p.omega_bar();
  const HyperbolicKernel h{p.omega_tilde_squared()};

  const double ch = h.cosh_like(t);
  const double c = std::cos(wb * t);
  const double s = std::sin(wb * t);
  const double cp = std::cos(p.omega_plus * t);
  const double sp = std::sin(p.omega_plus * t);
  const double w_over_wt_sh = w * h.sinhc(t);    // (w / w~) sinh(w~ t)
  const double wt_over_w_sh = h.w_sinh(t) / w;   // (w~ / w) sinh(w~ t)
  const double w_over_wb_s = w / wb * s;
  const double wb_over_w_s = wb / w * s;
  const double r2 = std::sqrt(2.0);

  // Block ordering (x0, x1, x2, p0, p1, p2) in the ion-2-reflected frame,
  // zero-based.
  std::array<std::array<double, 6>, 6> e{};
  e[0][0] = e[3][3] = 0.5 * (ch + c);
  e[0][1] = e[1][0] = e[3][4] = e[4][3] = r2 / 4.0 * (ch - c);
  e[0][2] = e[2][0] = e[3][5] = e[5][3] = -e[0][1];
  e[1][1] = e[4][4] = 0.25 * (ch + c + 2.0 * cp);
  e[1][2] = e[2][1] = e[4][5] = e[5][4] = 0.25 * (2.0 * cp - c - ch);
  e[2][2] = e[5][5] = 0.25 * (2.0 * cp + c + ch);

  e[0][3] = 0.5 * (w_over_wb_s + w_over_wt_sh);
  e[0][4] = e[1][3] = r2 / 4.0 * (-w_over_wb_s + w_over_wt_sh);
  e[0][5] = e[2][3] = -e[0][4];
  e[1][4] = e[2][5] = 0.25 * (w_over_wb_s + w_over_wt_sh + 2.0 * sp);
  e[1][5] = e[2][4] = -0.25 * (w_over_wb_s + w_over_wt_sh - 2.0 * sp);

  e[3][0] = 0.5 * (-wb_over_w_s + wt_over_w_sh);
  e[3][1] = e[4][0] = r2 / 4.0 * (wb_over_w_s + wt_over_w_sh);
  e[3][2] = e[5][0] = -e[3][1];
  e[4][1] = e[5][2] = 0.25 * (wt_over_w_sh - wb_over_w_s - 2.0 * sp);
  e[4][2] = e[5][1] = 0.25 * (wb_over_w_s - wt_over_w_sh - 2.0 * sp);

  // Block index -> interleaved index, and the reflection sign of each row.
  constexpr std::array<int, 6> to_interleaved{0, 2, 4, 1, 3, 5};
  constexpr std::array<double, 6> sign{1.0, 1.0, -1.0, 1.0, 1.0, -1.0};
  Matrix out(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      out(to_interleaved[i], to_interleaved[j]) = sign[i] * sign[j] * e[i][j];
    }
  }
  return out;
}

Matrix propagator_numeric(const SystemParams& s, double t) {
  require_finite_time(t, "propagator_numeric");
  return matrix_exponential(dynamics_generator(s) * t);
}

Matrix propagator(const SystemParams& s, double t) {
  s.validate();
  if (s.is_resonant()) return propagator_analytic(PropagatorParams::from(s), t);
  return propagator_numeric(s, t);
}

CovarianceMatrix evolve_closed(const CovarianceMatrix& gamma0, const SystemParams& s, double t) {
  if (gamma0.n_modes() != 3) throw InvalidArgument("evolve_closed: expected a 3-mode covariance");
  const Matrix e = propagator(s, t);
  const Matrix g = e * gamma0.matrix() * e.transpose();
  if (!g.allFinite()) throw NumericalError("evolve_closed: covariance overflowed", t);
  return CovarianceMatrix(symmetrized(g));
}

CovarianceMatrix evolve_closed_thermal(double alpha, const SystemParams& s, double t) {
  if (!(alpha >= 1.0)) throw InvalidArgument("evolve_closed_thermal: alpha must be >= 1");
  return evolve_closed(InitialState::thermal(alpha).covariance(), s, t);
}

CovarianceMatrix BlockDecomposition::assemble() const {
  Matrix g(6, 6);
  g.block<2, 2>(0, 0) = gamma_N;
  g.block<2, 2>(0, 2) = C;
  g.block<2, 2>(0, 4) = -C;
  g.block<2, 2>(2, 0) = C.transpose();
  g.block<2, 2>(4, 0) = -C.transpose();
  g.block<2, 2>(2, 2) = 0.5 * A_I;
  g.block<2, 2>(4, 4) = 0.5 * A_I;
  g.block<2, 2>(2, 4) = 0.5 * C_I;
  g.block<2, 2>(4, 2) = 0.5 * C_I.transpose();
  const Matrix r = ion2_reflection();
  return CovarianceMatrix(symmetrized(r * g * r));
}

BlockDecomposition BlockDecomposition::from_covariance(const CovarianceMatrix& gamma) {
  if (gamma.n_modes() != 3) throw InvalidArgument("BlockDecomposition: expected a 3-mode covariance");
  const Matrix r = ion2_reflection();
  const Matrix g = r * gamma.matrix() * r;
  BlockDecomposition b;
  b.gamma_N = g.block<2, 2>(0, 0);
  b.C = g.block<2, 2>(0, 2);
  b.A_I = 2.0 * g.block<2, 2>(2, 2);
  b.C_I = 2.0 * g.block<2, 2>(2, 4);
  return b;
}

BlockDecomposition closed_form_blocks(double omega, double kappa, double t, ThermalCase) {
  require_finite_time(t, "closed_form_blocks");
  if (!(omega > 0.0) || kappa < 0.0) {
    throw InvalidArgument("closed_form_blocks: need omega > 0 and kappa >= 0");
  }
  const double w2 = omega * omega;
  const double wb = std::sqrt(omega * (kappa + omega));
  const double wb2 = wb * wb;
  const HyperbolicKernel h{omega * (kappa - omega)};
  const double wt2 = h.s;

  const double sin_wb = std::sin(wb * t);
  const double a = (w2 - wb2) / (2.0 * wb2) * sin_wb * sin_wb;
  const double a_p = (wb2 - w2) / (2.0 * w2) * sin_wb * sin_wb;
  // (w^2 + w~^2) sinh^2 / (2 w~^2) == (w^2 + w~^2) (sinh / w~)^2 / 2
  const double sc = h.sinhc(t);
  const double b = (w2 + wt2) / 2.0 * sc * sc;
  const double b_p = (wt2 + w2) / (2.0 * w2) * h.sinh_squared(t);
  const double c = (w2 - wb2) / (4.0 * omega * wb) * std::sin(2.0 * wb * t);
  // sinh(2 w~ t) / w~ is sinhc at 2t.
  const double d = (w2 + wt2) / (4.0 * omega) * h.sinhc(2.0 * t);

  BlockDecomposition out;
  out.gamma_N << 1.0 + a + b, c + d, c + d, 1.0 + a_p + b_p;
  out.gamma_N *= 0.5;
  out.A_I << 1.0 + 0.5 * (a + b), 0.5 * (c + d), 0.5 * (c + d), 1.0 + 0.5 * (a_p + b_p);
  out.C_I << a + b, c + d, c + d, a_p + b_p;
  out.C_I *= -0.5;
  out.C << a - b, c - d, c - d, a_p - b_p;
  out.C *= -std::sqrt(2.0) / 4.0;
  return out;
}

}  // namespace ionnems
