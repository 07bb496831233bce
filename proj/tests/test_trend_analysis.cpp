#include <cmath>
#include <random>

#include "doctest.h"
#include "ionnems/errors.hpp"
#include "ionnems/kernels.hpp"
#include "ionnems/trend_analysis.hpp"

using namespace ionnems;

namespace {

std::vector<double> sample(const std::vector<double>& t, double (*f)(double)) {
  std::vector<double> v;
  for (double x : t) v.push_back(f(x));
  return v;
}

struct RoundTrip {
  FitModel model;
  std::vector<double> coef;
  double x_min, x_max;
};

std::vector<RoundTrip> round_trips() {
  return {
      {FitModel::LogGrowth, {0.5, 2.0, 0.9}, 1.0, 40.0},
      {FitModel::InverseSqrt, {0.1, 0.4}, 1.0, 40.0},
      {FitModel::ExpSqrtAlpha, {1.91, 1.3}, 1.0, 10.0},
      {FitModel::OffsetExp, {0.2, 0.8, 0.07}, 0.0, 30.0},
      {FitModel::PureExp, {1.5, 0.12}, 0.0, 30.0},
      {FitModel::OffsetInverseSqrt, {-0.04, -0.06, 0.44}, 1.0, 11.0},
  };
}

}  // namespace

TEST_SUITE("trend_analysis") {

TEST_CASE("sine peaks") {
  const std::vector<double> t = uniform_grid(4.0 * M_PI, 0.01);
  const PeakList p = local_maxima(t, sample(t, [](double x) { return std::sin(x); }));
  REQUIRE(p.size() == 2);
  CHECK(std::abs(p.times[0] - M_PI / 2) <= 1e-4);
  CHECK(std::abs(p.times[1] - 5 * M_PI / 2) <= 1e-4);
  CHECK(std::abs(p.values[0] - 1.0) <= 1e-4);
  CHECK(std::abs(p.values[1] - 1.0) <= 1e-4);
}

TEST_CASE("monotone and constant series have no peaks") {
  const std::vector<double> t = uniform_grid(5.0, 0.1);
  CHECK(local_maxima(t, t).empty());
  CHECK(local_maxima(t, std::vector<double>(t.size(), 0.3)).empty());
  CHECK(local_minima(t, std::vector<double>(t.size(), 0.3)).empty());
}

TEST_CASE("peak extraction preconditions") {
  CHECK_THROWS_AS(local_maxima({0.0, 1.0}, {0.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(local_maxima({0.0, 1.0, 3.0}, {0.0, 1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(local_maxima({0.0, 1.0, 2.0}, {0.0, 1.0}), InvalidArgument);
}

TEST_CASE("peak list invariants, refinement and duality") {
  std::mt19937 rng(51);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::vector<double> t = uniform_grid(10.0, 0.05);
  std::vector<double> v;
  for (double x : t) v.push_back(std::sin(3 * x) * std::exp(-0.1 * x) + 0.05 * n(rng));

  const PeakList p = local_maxima(t, v);
  REQUIRE(!p.empty());
  for (std::size_t k = 1; k < p.size(); ++k) CHECK(p.times[k] > p.times[k - 1]);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto i = static_cast<std::size_t>(std::lround(p.times[k] / 0.05));
    double raw = v[i];
    if (i > 0) raw = std::max(raw, v[i - 1]);
    if (i + 1 < v.size()) raw = std::max(raw, v[i + 1]);
    CHECK(p.values[k] >= raw - 1e-12);
  }

  std::vector<double> neg;
  for (double x : v) neg.push_back(-x);
  const PeakList mins = local_minima(t, neg);
  REQUIRE(mins.size() == p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    CHECK(mins.times[k] == p.times[k]);
    CHECK(mins.values[k] == -p.values[k]);
  }
}

TEST_CASE("first maximum and first zero") {
  const std::vector<double> t = uniform_grid(10.0, 0.01);
  std::vector<double> v;
  for (double x : t) v.push_back(std::max(0.0, std::sin(x)) * (x < 4.0 ? 1.0 : 0.0));
  const auto first = first_local_maximum(t, v);
  REQUIRE(first);
  CHECK(first->first == doctest::Approx(M_PI / 2).epsilon(1e-4));
  const auto zero = first_zero_after_rise(t, v);
  REQUIRE(zero);
  CHECK(*zero == doctest::Approx(M_PI).epsilon(1e-2));

  CHECK_FALSE(first_local_maximum(t, std::vector<double>(t.size(), 0.0)));
  CHECK_FALSE(first_zero_after_rise(t, std::vector<double>(t.size(), 0.5)));
}

TEST_CASE("period of a pure sinusoid") {
  const double period = 3.7;
  const std::vector<double> t = uniform_grid(40.0, 0.01);
  std::vector<double> v;
  for (double x : t) v.push_back(std::cos(2 * M_PI * x / period));
  CHECK(std::abs(oscillation_period(t, v) / period - 1.0) <= 1e-3);

  CHECK_THROWS_AS(oscillation_period(t, t), NotEnoughData);
}

TEST_CASE("period from the zeros of det C_I") {
  const std::vector<double> t = uniform_grid(30.0, 0.01);
  std::vector<Matrix2> c;
  for (double x : t) {
    Matrix2 m;
    m << std::cos(x), 0.2, 0.2 * std::cos(x), 1.0;  // det = 0.96 cos x, period 2 pi
    c.push_back(std::exp(0.05 * x) * m);
  }
  CHECK(std::abs(oscillation_period_from_correlation(t, c) / (2.0 * M_PI) - 1.0) <= 1e-3);

  // Tangential zeros: det = cos^2 touches zero without changing sign.
  std::vector<Matrix2> touch;
  for (double x : t) {
    Matrix2 m = Matrix2::Zero();
    m(0, 0) = std::cos(x);
    m(1, 1) = std::cos(x);
    m(0, 1) = 1.0;
    touch.push_back(m);
  }
  CHECK(std::abs(oscillation_period_from_correlation(t, touch) / M_PI - 1.0) <= 1e-2);

  // A tangential zero that opens into a pair of sign changes still counts once per cycle.
  std::vector<Matrix2> split;
  for (double x : t) {
    Matrix2 m = Matrix2::Zero();
    m(0, 0) = std::cos(x) * std::cos(x) - 0.05;
    m(1, 1) = 1.0;
    split.push_back(m);
  }
  CHECK(std::abs(oscillation_period_from_correlation(t, split) / M_PI - 1.0) <= 1e-3);

  CHECK_THROWS_AS(oscillation_period_from_correlation(t, std::vector<Matrix2>(t.size(), Matrix2::Zero())),
                  NotEnoughData);
}

TEST_CASE("model names") {
  CHECK(fit_model_from_string("LogGrowth") == FitModel::LogGrowth);
  CHECK(fit_model_from_string("log_growth") == FitModel::LogGrowth);
  CHECK(fit_model_from_string("offset_inverse_sqrt") == FitModel::OffsetInverseSqrt);
  CHECK_THROWS_AS(fit_model_from_string("cubic"), InvalidArgument);
  for (const auto& rt : round_trips()) {
    CHECK(fit_model_from_string(to_string(rt.model)) == rt.model);
    CHECK(coefficient_names(rt.model).size() == rt.coef.size());
  }
}

TEST_CASE("log-growth round trip") {
  std::vector<double> x, y;
  for (int k = 1; k <= 40; ++k) {
    x.push_back(k);
    y.push_back(0.5 * std::log(2.0 * k + 0.9));
  }
  const FitResult r = fit(FitModel::LogGrowth, x, y);
  CHECK(r.converged);
  CHECK(r.coefficient("b") == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.coefficient("c") == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.coefficient("d") == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(r.max_relative_error <= 1e-9);
}

TEST_CASE("every model round-trips noiseless data") {
  for (const auto& rt : round_trips()) {
    CAPTURE(to_string(rt.model));
    const Eigen::VectorXd truth = Eigen::Map<const Eigen::VectorXd>(rt.coef.data(), rt.coef.size());
    std::vector<double> x, y;
    for (int k = 0; k < 25; ++k) {
      const double xi = rt.x_min + (rt.x_max - rt.x_min) * k / 24.0;
      x.push_back(xi);
      y.push_back(evaluate_model(rt.model, truth, xi));
    }
    const FitResult r = fit(rt.model, x, y);
    CHECK(r.converged);
    REQUIRE(r.coefficients.size() == truth.size());
    for (Eigen::Index k = 0; k < truth.size(); ++k) {
      CHECK(std::abs(r.coefficients(k) - truth(k)) <= 1e-6 * std::abs(truth(k)));
    }
  }
}

TEST_CASE("refitting from the optimum does not increase the residual") {
  std::mt19937 rng(61);
  std::normal_distribution<double> n(0.0, 0.01);
  for (const auto& rt : round_trips()) {
    CAPTURE(to_string(rt.model));
    const Eigen::VectorXd truth = Eigen::Map<const Eigen::VectorXd>(rt.coef.data(), rt.coef.size());
    std::vector<double> x, y;
    for (int k = 0; k < 30; ++k) {
      const double xi = rt.x_min + (rt.x_max - rt.x_min) * k / 29.0;
      x.push_back(xi);
      y.push_back(evaluate_model(rt.model, truth, xi) * (1.0 + n(rng)));
    }
    const FitResult first = fit(rt.model, x, y);
    const std::vector<double> guess(first.coefficients.data(), first.coefficients.data() + first.coefficients.size());
    const FitResult again = fit(rt.model, x, y, guess);
    CHECK(again.sum_squares <= first.sum_squares * (1.0 + 1e-12) + 1e-300);
    if (first.converged) CHECK(std::isfinite(first.max_relative_error));
  }
}

TEST_CASE("fit preconditions") {
  CHECK_THROWS_AS(fit(FitModel::LogGrowth, {1, 2, 3}, {1, 2, 3}), InvalidArgument);
  CHECK_THROWS_AS(fit(FitModel::PureExp, {1, 2, 3}, {1, 2}), InvalidArgument);
  CHECK_THROWS_AS(fit(FitModel::InverseSqrt, {-1, 2, 3, 4}, {1, 2, 3, 4}), InvalidArgument);
  CHECK_THROWS_AS(fit(FitModel::PureExp, {1, 2, 3}, {1, 2, std::nan("")}), InvalidArgument);
  CHECK_THROWS_AS(fit(FitModel::PureExp, {1, 2, 3}, {1, 2, 3}, {1.0}), InvalidArgument);
}

}  // TEST_SUITE
