#pragma once

// Peak and period extraction from sampled series, and least-squares fits of
// the small closed-form trend laws used to summarize sweeps.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ionnems/symplectic.hpp"

namespace ionnems {

struct PeakList {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
};

/// Interior samples strictly greater than both neighbours, each refined by a
/// 3-point parabola. Requires >= 3 samples on a uniform grid.
PeakList local_maxima(const std::vector<double>& times, const std::vector<double>& values);

/// local_maxima of the negated series, with values negated back.
PeakList local_minima(const std::vector<double>& times, const std::vector<double>& values);

/// First local maximum whose value exceeds `floor` (clipped zero plateaus are
/// skipped this way).
std::optional<std::pair<double, double>> first_local_maximum(const std::vector<double>& times,
                                                             const std::vector<double>& values,
                                                             double floor = 1e-9);

/// First time at or after the series rose above `rise` where it is back to
/// <= clip. Empty when it never happens inside the series.
std::optional<double> first_zero_after_rise(const std::vector<double>& times,
                                            const std::vector<double>& values,
                                            double rise = 1e-6, double clip = 1e-10);

/// Mean spacing of consecutive local maxima. Throws NotEnoughData below two.
double oscillation_period(const std::vector<double>& times, const std::vector<double>& values);

/// Recurrence period of the zeros of det C_I(t), one zero per cycle. The
/// determinant is normalized by |C_I|_F^2 / 2 so that growth does not hide
/// zeros. Tangential zeros (local maxima of -|det| within `touch_tol` of zero)
/// count once; sign changes are located by interpolation and only upward ones
/// are counted, downward ones when there are too few. Falls back to the peak
/// spacing of the normalized determinant; throws NotEnoughData when all fail.
double oscillation_period_from_correlation(const std::vector<double>& times,
                                           const std::vector<Matrix2>& C_I,
                                           double touch_tol = 1e-2);

enum class FitModel { LogGrowth, InverseSqrt, ExpSqrtAlpha, OffsetExp, PureExp, OffsetInverseSqrt };

std::string_view to_string(FitModel m);
/// Accepts the enum spelling ("LogGrowth") or snake case ("log_growth").
FitModel fit_model_from_string(std::string_view name);

/// LogGrowth      y = b ln(c x + d)          (b, c, d)
/// InverseSqrt    y = 1 / (e sqrt(x) + f)    (e, f)
/// ExpSqrtAlpha   y = b exp(-c sqrt(x))      (b, c)
/// OffsetExp      y = a + b exp(-c x)        (a, b, c)
/// PureExp        y = a exp(-b x)            (a, b)
/// OffsetInverseSqrt y = a + 1 / (b + c sqrt(x))  (a, b, c)
const std::vector<std::string>& coefficient_names(FitModel m);

double evaluate_model(FitModel m, const Eigen::VectorXd& coef, double x);

struct FitResult {
  FitModel model = FitModel::LogGrowth;
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  double sum_squares = 0.0;
  double max_relative_error = 0.0;
  double gradient_norm = 0.0;  // |J^T r|_inf at the returned point
  int iterations = 0;
  bool converged = false;

  double coefficient(std::string_view name) const;
};

/// Levenberg-Marquardt least squares. Starting points come from separable
/// grid scans (the linear coefficients solved exactly for each value of the
/// nonlinear one) plus `initial_guess` when given; the best few are refined
/// with at most 200 iterations each.
FitResult fit(FitModel model, const std::vector<double>& x, const std::vector<double>& y,
              const std::vector<double>& initial_guess = {});

/// max |f(x_i) - y_i| / |y_i| (absolute error where y_i == 0).
double max_relative_error(FitModel model, const Eigen::VectorXd& coef, const std::vector<double>& x,
                          const std::vector<double>& y);

}  // namespace ionnems
