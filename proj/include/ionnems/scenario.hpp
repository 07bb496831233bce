#pragma once

// Scenario configuration and the runner behind the command-line tool.
//
// Config format: one key=value per line, '#' starts a comment. Keys:
//   scenario, omega, kappa, Omega, nu1, nu2, kappa1, kappa2, alpha, zeta,
//   n_bar, t_max, dt, sweep_var, sweep_min, sweep_max, sweep_steps, output_path
// Defaults: dt = 0.01, t_max = 30, Omega = 0.05, nu1 = nu2 = omega + Omega,
// kappa = 0, kappa1 = kappa2 = kappa, alpha = 1, zeta = n_bar = 0.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ionnems/closed_dynamics.hpp"
#include "ionnems/csv.hpp"
#include "ionnems/model.hpp"
#include "ionnems/open_dynamics.hpp"

namespace ionnems {

enum class Scenario { ClosedZeroT, ClosedThermal, Open, SweepKappa, SweepAlpha, SweepNbar, SweepZeta, FitReport, Spectrum };
enum class SweepVar { None, Kappa, Alpha, NBar, Zeta };

std::string_view to_string(Scenario s);
std::string_view to_string(SweepVar v);

struct ScenarioConfig {
  Scenario scenario = Scenario::ClosedZeroT;
  SystemParams system;
  InitialState initial;
  BathParams bath;
  double t_max = 30.0;
  double dt = 0.01;
  SweepVar sweep_var = SweepVar::None;
  double sweep_min = 0.0;
  double sweep_max = 0.0;
  int sweep_steps = 0;
  std::string output_path;

  bool is_sweep() const { return sweep_var != SweepVar::None; }
  /// sweep_steps points from sweep_min to sweep_max inclusive.
  std::vector<double> sweep_grid() const;
  /// Copy with the sweep variable set to x.
  ScenarioConfig at(double x) const;
  /// Open dynamics whenever the bath damps (zeta > 0) or the scenario says so.
  bool is_open() const;
};

/// Throws ParseError naming the offending line (line 0 for missing keys).
ScenarioConfig parse_config(std::string_view text);
/// parse_config on a file; IoError when it cannot be read.
ScenarioConfig parse_config_file(const std::string& path);

/// Covariances on `times` for the configured dynamics (closed or open).
std::vector<CovarianceMatrix> simulate_covariances(const ScenarioConfig& cfg, const std::vector<double>& times);

struct MeasureSummary {
  std::optional<double> t_first_max;
  std::optional<double> first_max;
  double final_value = 0.0;
};

struct SweepPoint {
  double x = 0.0;
  std::string status = "ok";
  double period = 0.0;  // NaN when not available
  MeasureSummary N12, N01, tau;
  double max_abs_gamma = 0.0;
};

/// One sweep grid point: the trajectory to t_max and its summaries.
/// Numerical failures are recorded in `status`, never thrown.
SweepPoint evaluate_sweep_point(const ScenarioConfig& base, double x);

/// Parallel over grid points (OpenMP).
std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg);

CsvTable sweep_table(const ScenarioConfig& cfg, const std::vector<SweepPoint>& points);
CsvTable fit_report_table(const ScenarioConfig& cfg, const std::vector<SweepPoint>& points);

/// Header of every fit-report CSV.
std::vector<std::string> fit_report_header();

struct RunOptions {
  std::string out_dir;  // empty: output_path as given
};

struct RunSummary {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

/// Executes the scenario and writes its CSV files. Throws ParseError /
/// InvalidArgument (config), NumericalError, IoError.
RunSummary run(const ScenarioConfig& cfg, const RunOptions& opt = {});

/// Six eigenvalues of J H, the squeezing threshold and the classification.
std::string spectrum_report(const ScenarioConfig& cfg);

/// Above this max |gamma| double-precision negativities are roundoff-dominated.
inline constexpr double kPrecisionHorizon = 1e12;

}  // namespace ionnems
