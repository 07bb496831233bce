#include "ionnems/open_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/KroneckerProduct>

#include "ionnems/errors.hpp"

namespace ionnems {

namespace {

Matrix lyapunov_rhs(const Matrix& g, const DriftDiffusion& dd) {
  const Matrix gg = dd.Gamma * g;
  return gg + gg.transpose() + dd.D;
}

Matrix rk4(Matrix y, const DriftDiffusion& dd, double h, long n) {
  for (long k = 0; k < n; ++k) {
    const Matrix k1 = lyapunov_rhs(y, dd);
    const Matrix k2 = lyapunov_rhs(y + 0.5 * h * k1, dd);
    const Matrix k3 = lyapunov_rhs(y + 0.5 * h * k2, dd);
    const Matrix k4 = lyapunov_rhs(y + h * k3, dd);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

void require_drift(const DriftDiffusion& dd, Eigen::Index dim, const char* who) {
  if (dd.Gamma.rows() != dim || dd.Gamma.cols() != dim || dd.D.rows() != dim || dd.D.cols() != dim) {
    throw InvalidArgument(std::string(who) + ": drift/diffusion size does not match the covariance");
  }
  if (!dd.Gamma.allFinite() || !dd.D.allFinite()) {
    throw InvalidArgument(std::string(who) + ": non-finite drift or diffusion");
  }
}

// Integrand e^{G s} D e^{G^T s}.
Matrix diffusion_kernel(const DriftDiffusion& dd, double s) {
  const Matrix e = matrix_exponential(dd.Gamma * s);
  return e * dd.D * e.transpose();
}

struct Panel {
  double a, b;
  Matrix value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gauss_kronrod_panel(const DriftDiffusion& dd, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G7 = boost::math::quadrature::gauss<double, 7>;
  const auto& x = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G7::weights();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);

  const Matrix f0 = diffusion_kernel(dd, mid);
  Matrix kronrod = wk[0] * f0;
  Matrix gauss = wg[0] * f0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const Matrix f = diffusion_kernel(dd, mid + half * x[i]) + diffusion_kernel(dd, mid - half * x[i]);
    kronrod += wk[i] * f;
    if (i % 2 == 0) gauss += wg[i / 2] * f;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, max_abs(kronrod - gauss)};
}

}  // namespace

void BathParams::validate() const {
  if (!std::isfinite(zeta) || zeta < 0.0) throw InvalidArgument("BathParams: zeta must be finite and >= 0");
  if (!std::isfinite(n_bar) || n_bar < 0.0) throw InvalidArgument("BathParams: n_bar must be finite and >= 0");
}

LindbladSpec nems_damping_lindblads(const BathParams& b) {
  b.validate();
  const std::complex<double> i(0.0, 1.0);
  Eigen::VectorXcd decay = Eigen::VectorXcd::Zero(6);
  Eigen::VectorXcd pump = Eigen::VectorXcd::Zero(6);
  decay(0) = i;
  decay(1) = -1.0;
  decay *= std::sqrt(b.zeta * (b.n_bar + 1.0) / 2.0);
  pump(0) = i;
  pump(1) = 1.0;
  pump *= -std::sqrt(b.zeta * b.n_bar / 2.0);
  return {{decay, pump}};
}

DriftDiffusion drift_and_diffusion(const SystemParams& s, const LindbladSpec& l) {
  const Matrix h = hamiltonian_matrix(s);
  Eigen::MatrixXcd upsilon = Eigen::MatrixXcd::Zero(6, 6);
  for (const auto& v : l.vectors) {
    if (v.size() != 6) throw InvalidArgument("drift_and_diffusion: Lindblad vectors must have 6 entries");
    if (!v.allFinite()) throw InvalidArgument("drift_and_diffusion: non-finite Lindblad vector");
    upsilon += v * v.adjoint();
  }
  DriftDiffusion dd;
  dd.Gamma = SymplecticForm(3).matrix() * (h - upsilon.imag());
  dd.D = symmetrized(upsilon.real());
  return dd;
}

DriftDiffusion nems_damped(const SystemParams& s, const BathParams& b) {
  return drift_and_diffusion(s, nems_damping_lindblads(b));
}

std::vector<CovarianceMatrix> evolve_open(const CovarianceMatrix& gamma0, const DriftDiffusion& dd,
                                          const std::vector<double>& t_grid, const OdeOptions& opt) {
  require_drift(dd, gamma0.matrix().rows(), "evolve_open");
  if (t_grid.empty()) return {};
  if (t_grid.front() != 0.0) throw InvalidArgument("evolve_open: time grid must start at 0");
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > t_grid[k - 1]) || !std::isfinite(t_grid[k])) {
      throw InvalidArgument("evolve_open: time grid must be finite and strictly ascending");
    }
  }

  std::vector<CovarianceMatrix> out;
  out.reserve(t_grid.size());
  out.push_back(gamma0);
  Matrix y = gamma0.matrix();
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double span = t_grid[k] - t_grid[k - 1];
    const double h0 = std::min(opt.max_step, span / 10.0);
    long n = std::max(1L, static_cast<long>(std::ceil(span / h0 - 1e-9)));
    Matrix coarse = rk4(y, dd, span / n, n);
    bool accepted = false;
    for (int level = 0; level <= opt.max_halvings; ++level) {
      Matrix fine = rk4(y, dd, span / (2 * n), 2 * n);
      if (!fine.allFinite()) throw NumericalError("evolve_open: non-finite state", t_grid[k]);
      const double scale = std::max(1.0, max_abs(fine));
      if (max_abs(fine - coarse) <= opt.agreement * scale) {
        y = symmetrized(fine);
        accepted = true;
        break;
      }
      coarse = std::move(fine);
      n *= 2;
    }
    if (!accepted) throw NumericalError("evolve_open: step refinement did not converge", t_grid[k]);
    out.emplace_back(y);
  }
  return out;
}

CovarianceMatrix evolve_open_quadrature(const CovarianceMatrix& gamma0, const DriftDiffusion& dd,
                                        double t, double abs_tol) {
  require_drift(dd, gamma0.matrix().rows(), "evolve_open_quadrature");
  if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("evolve_open_quadrature: t must be finite and >= 0");
  const Matrix e = matrix_exponential(dd.Gamma * t);
  Matrix result = e * gamma0.matrix() * e.transpose();
  if (t == 0.0 || max_abs(dd.D) == 0.0) return CovarianceMatrix(symmetrized(result));

  // Global adaptive refinement: keep splitting the worst panel.
  std::priority_queue<Panel> panels;
  Panel first = gauss_kronrod_panel(dd, 0.0, t);
  Matrix integral = first.value;
  double total_error = first.error;
  panels.push(std::move(first));
  constexpr int kMaxPanels = 4000;
  int count = 1;
  for (;;) {
    const double tol = std::max(abs_tol, 1e-13 * max_abs(integral));
    if (total_error <= tol) break;
    if (count >= kMaxPanels) {
      throw NumericalError("evolve_open_quadrature: no convergence (error " +
                               std::to_string(total_error) + ")", t);
    }
    Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = gauss_kronrod_panel(dd, worst.a, mid);
    Panel right = gauss_kronrod_panel(dd, mid, worst.b);
    integral += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push(std::move(left));
    panels.push(std::move(right));
    ++count;
  }
  result += integral;
  if (!result.allFinite()) throw NumericalError("evolve_open_quadrature: non-finite result", t);
  return CovarianceMatrix(symmetrized(result));
}

SteadyState steady_state(const DriftDiffusion& dd) {
  const Eigen::Index dim = dd.Gamma.rows();
  if (dim == 0 || dim % 2 != 0 || dd.Gamma.cols() != dim) {
    throw InvalidArgument("steady_state: drift must be 2n x 2n");
  }
  require_drift(dd, dim, "steady_state");
  const int n = static_cast<int>(dim / 2);

  auto block_nonzero = [](const Matrix& m, int i, int j) {
    return m.block<2, 2>(2 * i, 2 * j).cwiseAbs().maxCoeff() > 0.0;
  };
  const Matrix sym = symmetrized(dd.Gamma);

  // Modes touched by dissipation, then everything coupled to them.
  std::vector<char> in(n, 0);
  std::vector<int> stack;
  for (int i = 0; i < n; ++i) {
    if (block_nonzero(dd.D, i, i) || block_nonzero(sym, i, i)) {
      in[i] = 1;
      stack.push_back(i);
    }
  }
  if (stack.empty()) throw NoSteadyState("steady_state: no damped mode");
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < n; ++j) {
      if (in[j]) continue;
      if (block_nonzero(dd.Gamma, i, j) || block_nonzero(dd.Gamma, j, i) || block_nonzero(dd.D, i, j)) {
        in[j] = 1;
        stack.push_back(j);
      }
    }
  }

  SteadyState out{{}, CovarianceMatrix::vacuum(1)};
  std::vector<Eigen::Index> idx;
  for (int i = 0; i < n; ++i) {
    if (!in[i]) continue;
    out.modes.push_back(i);
    idx.push_back(2 * i);
    idx.push_back(2 * i + 1);
  }
  const Matrix g = dd.Gamma(idx, idx);
  const Matrix d = dd.D(idx, idx);

  Eigen::EigenSolver<Matrix> es(g, false);
  if (es.info() != Eigen::Success) throw NumericalError("steady_state: eigen-solver failed");
  const double max_re = es.eigenvalues().real().maxCoeff();
  if (!(max_re < -1e-12)) {
    throw NoSteadyState("steady_state: drift is not Hurwitz on the damped modes (max Re = " +
                        std::to_string(max_re) + ")");
  }

  const Eigen::Index m = g.rows();
  const Matrix eye = Matrix::Identity(m, m);
  const Matrix lhs = Eigen::kroneckerProduct(eye, g) + Eigen::kroneckerProduct(g, eye);
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(d.data(), d.size());
  const Eigen::VectorXd vec = lhs.fullPivLu().solve(rhs);
  Matrix x = symmetrized(Eigen::Map<const Matrix>(vec.data(), m, m));

  const double residual = max_abs(g * x + x * g.transpose() + d);
  if (!x.allFinite() || residual > 1e-10 * std::max(1.0, max_abs(x))) {
    throw NumericalError("steady_state: Lyapunov residual " + std::to_string(residual));
  }
  out.X = CovarianceMatrix(std::move(x));
  return out;
}

}  // namespace ionnems
