#include "ionnems/trend_analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <unsupported/Eigen/NonLinearOptimization>

#include "ionnems/errors.hpp"

namespace ionnems {

namespace {

void require_uniform(const std::vector<double>& t, const std::vector<double>& v, const char* who) {
  if (t.size() != v.size()) throw InvalidArgument(std::string(who) + ": times and values differ in length");
  if (t.size() < 3) throw InvalidArgument(std::string(who) + ": need at least 3 samples");
  const double h = t[1] - t[0];
  if (!(h > 0.0)) throw InvalidArgument(std::string(who) + ": times must ascend");
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (std::abs((t[k] - t[k - 1]) - h) > 1e-6 * h) {
      throw InvalidArgument(std::string(who) + ": time grid is not uniform");
    }
  }
}

// --- model algebra ---------------------------------------------------------

int arity(FitModel m) {
  switch (m) {
    case FitModel::InverseSqrt:
    case FitModel::ExpSqrtAlpha:
    case FitModel::PureExp:
      return 2;
    default:
      return 3;
  }
}

bool uses_sqrt(FitModel m) {
  return m == FitModel::InverseSqrt || m == FitModel::ExpSqrtAlpha || m == FitModel::OffsetInverseSqrt;
}

// Value and gradient at x; false outside the model's domain.
bool model_eval(FitModel m, const Eigen::VectorXd& p, double x, double& f, double* grad) {
  switch (m) {
    case FitModel::LogGrowth: {
      const double u = p(1) * x + p(2);
      if (!(u > 0.0)) return false;
      f = p(0) * std::log(u);
      if (grad) {
        grad[0] = std::log(u);
        grad[1] = p(0) * x / u;
        grad[2] = p(0) / u;
      }
      return true;
    }
    case FitModel::InverseSqrt: {
      const double sx = std::sqrt(x);
      const double u = p(0) * sx + p(1);
      if (u == 0.0) return false;
      f = 1.0 / u;
      if (grad) {
        grad[0] = -sx / (u * u);
        grad[1] = -1.0 / (u * u);
      }
      return true;
    }
    case FitModel::ExpSqrtAlpha: {
      const double sx = std::sqrt(x);
      const double e = std::exp(-p(1) * sx);
      f = p(0) * e;
      if (grad) {
        grad[0] = e;
        grad[1] = -p(0) * sx * e;
      }
      return std::isfinite(f);
    }
    case FitModel::OffsetExp: {
      const double e = std::exp(-p(2) * x);
      f = p(0) + p(1) * e;
      if (grad) {
        grad[0] = 1.0;
        grad[1] = e;
        grad[2] = -p(1) * x * e;
      }
      return std::isfinite(f);
    }
    case FitModel::PureExp: {
      const double e = std::exp(-p(1) * x);
      f = p(0) * e;
      if (grad) {
        grad[0] = e;
        grad[1] = -p(0) * x * e;
      }
      return std::isfinite(f);
    }
    case FitModel::OffsetInverseSqrt: {
      const double sx = std::sqrt(x);
      const double u = p(1) + p(2) * sx;
      if (u == 0.0) return false;
      f = p(0) + 1.0 / u;
      if (grad) {
        grad[0] = 1.0;
        grad[1] = -1.0 / (u * u);
        grad[2] = -sx / (u * u);
      }
      return true;
    }
  }
  return false;
}

double sum_squares(FitModel m, const Eigen::VectorXd& p, const std::vector<double>& x,
                   const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double f = 0.0;
    if (!model_eval(m, p, x[i], f, nullptr)) return std::numeric_limits<double>::infinity();
    s += (f - y[i]) * (f - y[i]);
  }
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

// Outside the domain the residual is a large constant: LM rejects such steps.
constexpr double kPenalty = 1e10;

struct ResidualFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  FitModel model;
  const std::vector<double>* x;
  const std::vector<double>* y;

  int inputs() const { return arity(model); }
  int values() const { return static_cast<int>(x->size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (int i = 0; i < values(); ++i) {
      double f = 0.0;
      r(i) = model_eval(model, p, (*x)[i], f, nullptr) ? f - (*y)[i] : kPenalty;
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& jac) const {
    double g[3];
    for (int i = 0; i < values(); ++i) {
      double f = 0.0;
      if (model_eval(model, p, (*x)[i], f, g)) {
        for (int k = 0; k < inputs(); ++k) jac(i, k) = g[k];
      } else {
        jac.row(i).setZero();
      }
    }
    return 0;
  }
};

// --- separable starting points ----------------------------------------------

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
  return g;
}

// Least squares for y ~ sum_k coef_k basis_k.
bool linear_fit(const Eigen::MatrixXd& basis, const std::vector<double>& y, Eigen::VectorXd& coef) {
  if (!basis.allFinite()) return false;
  const Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  coef = basis.colPivHouseholderQr().solve(yy);
  return coef.allFinite();
}

std::vector<Eigen::VectorXd> starting_points(FitModel m, const std::vector<double>& x,
                                             const std::vector<double>& y) {
  std::vector<Eigen::VectorXd> out;
  const auto n = static_cast<Eigen::Index>(x.size());
  const double xmax = std::max(1e-12, std::abs(*std::max_element(x.begin(), x.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  })));
  const double ymin = *std::min_element(y.begin(), y.end());
  const double ymax = *std::max_element(y.begin(), y.end());
  const double span = std::max(ymax - ymin, 1e-12 * std::max(1.0, std::abs(ymax)));

  // Rates for exponentials in x or sqrt(x), both signs.
  const double rate_scale = uses_sqrt(m) ? std::sqrt(xmax) : xmax;
  std::vector<double> rates;
  for (double r : log_grid(1e-3 / rate_scale, 1e2 / rate_scale, 61)) {
    rates.push_back(r);
    rates.push_back(-r);
  }

  switch (m) {
    case FitModel::LogGrowth: {
      // y = b ln d + b ln(1 + q x) with q = c / d.
      for (double q : log_grid(1e-3 / xmax, 1e3 / xmax, 61)) {
        Eigen::MatrixXd basis(n, 2);
        bool ok = true;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double u = 1.0 + q * x[i];
          if (!(u > 0.0)) ok = false;
          basis(i, 0) = 1.0;
          basis(i, 1) = ok ? std::log(u) : 0.0;
        }
        Eigen::VectorXd c;
        if (!ok || !linear_fit(basis, y, c) || c(1) == 0.0) continue;
        const double d = std::exp(c(0) / c(1));
        if (!std::isfinite(d) || d <= 0.0) continue;
        Eigen::VectorXd p(3);
        p << c(1), q * d, d;
        out.push_back(p);
      }
      break;
    }
    case FitModel::InverseSqrt: {
      // 1/y = e sqrt(x) + f.
      std::vector<double> inv(y.size());
      bool ok = true;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) ok = false;
        inv[i] = ok ? 1.0 / y[i] : 0.0;
      }
      Eigen::MatrixXd basis(n, 2);
      for (Eigen::Index i = 0; i < n; ++i) {
        basis(i, 0) = std::sqrt(x[i]);
        basis(i, 1) = 1.0;
      }
      Eigen::VectorXd c;
      if (ok && linear_fit(basis, inv, c)) out.push_back(c);
      break;
    }
    case FitModel::ExpSqrtAlpha:
    case FitModel::PureExp:
    case FitModel::OffsetExp: {
      const bool offset = m == FitModel::OffsetExp;
      for (double r : rates) {
        Eigen::MatrixXd basis(n, offset ? 2 : 1);
        for (Eigen::Index i = 0; i < n; ++i) {
          const double arg = m == FitModel::ExpSqrtAlpha ? std::sqrt(x[i]) : x[i];
          basis(i, 0) = std::exp(-r * arg);
          if (offset) basis(i, 1) = 1.0;
        }
        Eigen::VectorXd c;
        if (!linear_fit(basis, y, c)) continue;
        Eigen::VectorXd p(offset ? 3 : 2);
        if (offset) {
          p << c(1), c(0), r;
        } else {
          p << c(0), r;
        }
        out.push_back(p);
      }
      break;
    }
    case FitModel::OffsetInverseSqrt: {
      // For fixed a, 1 / (y - a) = b + c sqrt(x).
      std::vector<double> offsets;
      for (double s : log_grid(1e-3, 1e2, 41)) {
        offsets.push_back(ymin - s * span);
        offsets.push_back(ymax + s * span);
      }
      Eigen::MatrixXd basis(n, 2);
      for (Eigen::Index i = 0; i < n; ++i) {
        basis(i, 0) = 1.0;
        basis(i, 1) = std::sqrt(x[i]);
      }
      for (double a : offsets) {
        std::vector<double> inv(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) inv[i] = 1.0 / (y[i] - a);
        Eigen::VectorXd c;
        if (!linear_fit(basis, inv, c)) continue;
        Eigen::VectorXd p(3);
        p << a, c(0), c(1);
        out.push_back(p);
      }
      break;
    }
  }
  return out;
}

struct LmOutcome {
  Eigen::VectorXd p;
  int iterations = 0;
  int status = 0;
};

LmOutcome refine(FitModel m, Eigen::VectorXd p, const std::vector<double>& x, const std::vector<double>& y) {
  ResidualFunctor functor{m, &x, &y};
  Eigen::LevenbergMarquardt<ResidualFunctor> lm(functor);
  lm.parameters.ftol = 1e-15;
  lm.parameters.xtol = 1e-15;
  lm.parameters.gtol = 0.0;
  lm.parameters.maxfev = 100000;
  // minimizeInit reports NotStarted on valid input; only invalid input stops it.
  auto status = lm.minimizeInit(p);
  if (status == Eigen::LevenbergMarquardtSpace::NotStarted) status = Eigen::LevenbergMarquardtSpace::Running;
  int iter = 0;
  while (status == Eigen::LevenbergMarquardtSpace::Running && iter < 200) {
    status = lm.minimizeOneStep(p);
    ++iter;
  }
  return {p, iter, static_cast<int>(status)};
}

double gradient_inf_norm(FitModel m, const Eigen::VectorXd& p, const std::vector<double>& x,
                         const std::vector<double>& y) {
  ResidualFunctor functor{m, &x, &y};
  Eigen::VectorXd r(functor.values());
  Eigen::MatrixXd jac(functor.values(), functor.inputs());
  functor(p, r);
  functor.df(p, jac);
  return (jac.transpose() * r).cwiseAbs().maxCoeff();
}

}  // namespace

// ---------------------------------------------------------------------------

PeakList local_maxima(const std::vector<double>& times, const std::vector<double>& values) {
  require_uniform(times, values, "local_maxima");
  const double h = times[1] - times[0];
  PeakList out;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    const double l = values[i - 1], c = values[i], r = values[i + 1];
    if (!(c > l && c > r)) continue;
    const double denom = l - 2.0 * c + r;  // < 0 at a strict peak
    const double delta = 0.5 * (l - r) / denom;
    out.times.push_back(times[i] + delta * h);
    out.values.push_back(std::max(c, c - 0.25 * (l - r) * delta));
  }
  return out;
}

PeakList local_minima(const std::vector<double>& times, const std::vector<double>& values) {
  std::vector<double> neg(values.size());
  std::transform(values.begin(), values.end(), neg.begin(), [](double v) { return -v; });
  PeakList out = local_maxima(times, neg);
  for (double& v : out.values) v = -v;
  return out;
}

std::optional<std::pair<double, double>> first_local_maximum(const std::vector<double>& times,
                                                             const std::vector<double>& values,
                                                             double floor) {
  const PeakList peaks = local_maxima(times, values);
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    if (peaks.values[k] > floor) return std::make_pair(peaks.times[k], peaks.values[k]);
  }
  return std::nullopt;
}

std::optional<double> first_zero_after_rise(const std::vector<double>& times,
                                            const std::vector<double>& values, double rise,
                                            double clip) {
  if (times.size() != values.size()) throw InvalidArgument("first_zero_after_rise: length mismatch");
  bool risen = false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] > rise) risen = true;
    if (risen && values[k] <= clip) return times[k];
  }
  return std::nullopt;
}

double oscillation_period(const std::vector<double>& times, const std::vector<double>& values) {
  const PeakList peaks = local_maxima(times, values);
  if (peaks.size() < 2) throw NotEnoughData("oscillation_period: fewer than two peaks in the window");
  return (peaks.times.back() - peaks.times.front()) / static_cast<double>(peaks.size() - 1);
}

double oscillation_period_from_correlation(const std::vector<double>& times,
                                           const std::vector<Matrix2>& C_I, double touch_tol) {
  if (times.size() != C_I.size()) throw InvalidArgument("oscillation_period_from_correlation: length mismatch");
  std::vector<double> t, g;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double norm2 = C_I[k].squaredNorm();
    if (!(norm2 > 1e-24)) continue;  // C_I == 0: ratio undefined
    t.push_back(times[k]);
    g.push_back(2.0 * C_I[k].determinant() / norm2);
  }
  if (t.size() < 3) throw NotEnoughData("oscillation_period_from_correlation: too few usable samples");
  // Dropping t = 0 keeps the grid uniform; any interior drop does not.
  require_uniform(t, g, "oscillation_period_from_correlation");

  // One event per cycle: a tangential zero is a double zero, and when it opens
  // into a pair of sign changes only the upward member of the pair is kept.
  std::vector<double> up, down;
  for (std::size_t k = 1; k < g.size(); ++k) {
    if (g[k - 1] < 0.0 && g[k] >= 0.0) {
      up.push_back(t[k - 1] + (t[k] - t[k - 1]) * g[k - 1] / (g[k - 1] - g[k]));
    } else if (g[k - 1] > 0.0 && g[k] <= 0.0) {
      down.push_back(t[k - 1] + (t[k] - t[k - 1]) * g[k - 1] / (g[k - 1] - g[k]));
    }
  }
  const double h = t[1] - t[0];
  auto near_crossing = [&](double x) {
    for (const auto* v : {&up, &down})
      for (double z : *v)
        if (std::abs(z - x) < 2.0 * h) return true;
    return false;
  };
  std::vector<double> neg_abs(g.size());
  std::transform(g.begin(), g.end(), neg_abs.begin(), [](double v) { return -std::abs(v); });
  const PeakList minima = local_maxima(t, neg_abs);
  std::vector<double> touches;
  for (std::size_t k = 0; k < minima.size(); ++k) {
    if (minima.values[k] >= -touch_tol && !near_crossing(minima.times[k])) touches.push_back(minima.times[k]);
  }
  for (const auto* crossings : {&up, &down}) {
    std::vector<double> events = touches;
    events.insert(events.end(), crossings->begin(), crossings->end());
    std::sort(events.begin(), events.end());
    if (events.size() >= 2) {
      return (events.back() - events.front()) / static_cast<double>(events.size() - 1);
    }
  }
  return oscillation_period(t, g);
}

// ---------------------------------------------------------------------------

std::string_view to_string(FitModel m) {
  switch (m) {
    case FitModel::LogGrowth: return "LogGrowth";
    case FitModel::InverseSqrt: return "InverseSqrt";
    case FitModel::ExpSqrtAlpha: return "ExpSqrtAlpha";
    case FitModel::OffsetExp: return "OffsetExp";
    case FitModel::PureExp: return "PureExp";
    case FitModel::OffsetInverseSqrt: return "OffsetInverseSqrt";
  }
  return "?";
}

FitModel fit_model_from_string(std::string_view name) {
  auto squash = [](std::string_view s) {
    std::string out;
    for (char ch : s) {
      if (ch != '_' && ch != '-') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    return out;
  };
  const std::string key = squash(name);
  for (FitModel m : {FitModel::LogGrowth, FitModel::InverseSqrt, FitModel::ExpSqrtAlpha, FitModel::OffsetExp,
                     FitModel::PureExp, FitModel::OffsetInverseSqrt}) {
    if (squash(to_string(m)) == key) return m;
  }
  throw InvalidArgument("unknown fit model '" + std::string(name) + "'");
}

const std::vector<std::string>& coefficient_names(FitModel m) {
  static const std::vector<std::string> bcd{"b", "c", "d"}, ef{"e", "f"}, bc{"b", "c"}, abc{"a", "b", "c"},
      ab{"a", "b"};
  switch (m) {
    case FitModel::LogGrowth: return bcd;
    case FitModel::InverseSqrt: return ef;
    case FitModel::ExpSqrtAlpha: return bc;
    case FitModel::OffsetExp: return abc;
    case FitModel::PureExp: return ab;
    case FitModel::OffsetInverseSqrt: return abc;
  }
  return abc;
}

double evaluate_model(FitModel m, const Eigen::VectorXd& coef, double x) {
  if (coef.size() != arity(m)) throw InvalidArgument("evaluate_model: wrong coefficient count");
  double f = 0.0;
  if (!model_eval(m, coef, x, f, nullptr)) return std::numeric_limits<double>::quiet_NaN();
  return f;
}

double FitResult::coefficient(std::string_view name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return coefficients(static_cast<Eigen::Index>(k));
  }
  throw InvalidArgument("FitResult: no coefficient '" + std::string(name) + "'");
}

double max_relative_error(FitModel model, const Eigen::VectorXd& coef, const std::vector<double>& x,
                          const std::vector<double>& y) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = evaluate_model(model, coef, x[i]);
    const double err = y[i] == 0.0 ? std::abs(f - y[i]) : std::abs(f - y[i]) / std::abs(y[i]);
    if (!std::isfinite(err)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, err);
  }
  return worst;
}

FitResult fit(FitModel model, const std::vector<double>& x, const std::vector<double>& y,
              const std::vector<double>& initial_guess) {
  const int k = arity(model);
  if (x.size() != y.size()) throw InvalidArgument("fit: x and y differ in length");
  if (static_cast<int>(x.size()) < k + 1) {
    throw InvalidArgument("fit: " + std::string(to_string(model)) + " needs at least " + std::to_string(k + 1) +
                          " points");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidArgument("fit: non-finite data");
    if (uses_sqrt(model) && x[i] < 0.0) throw InvalidArgument("fit: sqrt models need x >= 0");
  }
  if (!initial_guess.empty() && static_cast<int>(initial_guess.size()) != k) {
    throw InvalidArgument("fit: initial guess has the wrong number of coefficients");
  }

  std::vector<Eigen::VectorXd> starts = starting_points(model, x, y);
  if (!initial_guess.empty()) {
    starts.push_back(Eigen::Map<const Eigen::VectorXd>(initial_guess.data(), k));
  }
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const double s = sum_squares(model, starts[i], x, y);
    if (std::isfinite(s)) ranked.emplace_back(s, i);
  }
  std::sort(ranked.begin(), ranked.end());
  // A user guess is always refined, even when it ranks poorly.
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < ranked.size() && chosen.size() < 4; ++i) chosen.push_back(ranked[i].second);
  if (!initial_guess.empty() &&
      std::find(chosen.begin(), chosen.end(), starts.size() - 1) == chosen.end()) {
    chosen.push_back(starts.size() - 1);
  }

  FitResult best;
  best.model = model;
  best.names = coefficient_names(model);
  best.sum_squares = std::numeric_limits<double>::infinity();
  best.coefficients = Eigen::VectorXd::Zero(k);
  int best_status = -1;
  for (std::size_t idx : chosen) {
    LmOutcome o = refine(model, starts[idx], x, y);
    const double s = sum_squares(model, o.p, x, y);
    if (s < best.sum_squares) {
      best.sum_squares = s;
      best.coefficients = o.p;
      best.iterations = o.iterations;
      best_status = o.status;
    }
  }
  if (!std::isfinite(best.sum_squares)) {
    best.max_relative_error = std::numeric_limits<double>::infinity();
    best.gradient_norm = std::numeric_limits<double>::infinity();
    best.converged = false;
    return best;
  }
  best.max_relative_error = max_relative_error(model, best.coefficients, x, y);
  best.gradient_norm = gradient_inf_norm(model, best.coefficients, x, y);
  using namespace Eigen::LevenbergMarquardtSpace;
  const bool stopped_cleanly = best_status == RelativeReductionTooSmall || best_status == RelativeErrorTooSmall ||
                               best_status == RelativeErrorAndReductionTooSmall ||
                               best_status == CosinusTooSmall || best_status == FtolTooSmall ||
                               best_status == XtolTooSmall || best_status == GtolTooSmall;
  best.converged = (stopped_cleanly || best.gradient_norm < 1e-10) && std::isfinite(best.max_relative_error);
  return best;
}

}  // namespace ionnems
