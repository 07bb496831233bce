#include "ionnems/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "ionnems/entanglement.hpp"
#include "ionnems/errors.hpp"
#include "ionnems/kernels.hpp"
#include "ionnems/trend_analysis.hpp"

namespace ionnems {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::map<std::string, Scenario, std::less<>>& scenario_names() {
  static const std::map<std::string, Scenario, std::less<>> m{
      {"closed_zero_t", Scenario::ClosedZeroT}, {"closed_thermal", Scenario::ClosedThermal},
      {"open", Scenario::Open},                 {"sweep_kappa", Scenario::SweepKappa},
      {"sweep_alpha", Scenario::SweepAlpha},    {"sweep_nbar", Scenario::SweepNbar},
      {"sweep_zeta", Scenario::SweepZeta},      {"fit_report", Scenario::FitReport},
      {"spectrum", Scenario::Spectrum}};
  return m;
}

const std::map<std::string, SweepVar, std::less<>>& sweep_names() {
  static const std::map<std::string, SweepVar, std::less<>> m{
      {"kappa", SweepVar::Kappa}, {"alpha", SweepVar::Alpha}, {"n_bar", SweepVar::NBar}, {"zeta", SweepVar::Zeta}};
  return m;
}

const char* const kKeys[] = {"scenario", "omega",  "kappa",     "Omega",     "nu1",       "nu2",
                             "kappa1",   "kappa2", "alpha",     "zeta",      "n_bar",     "t_max",
                             "dt",       "sweep_var", "sweep_min", "sweep_max", "sweep_steps", "output_path"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  int line;
};

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry, std::less<>> e) : entries_(std::move(e)) {}

  bool has(std::string_view k) const { return entries_.count(k) != 0; }
  int line(std::string_view k) const {
    auto it = entries_.find(k);
    return it == entries_.end() ? 0 : it->second.line;
  }

  double number(std::string_view k, std::optional<double> fallback) const {
    auto it = entries_.find(k);
    if (it == entries_.end()) {
      if (!fallback) throw ParseError("missing required key '" + std::string(k) + "'", 0);
      return *fallback;
    }
    const std::string& s = it->second.value;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
      throw ParseError("value of '" + std::string(k) + "' is not a finite number: '" + s + "'", it->second.line);
    }
    return v;
  }

  std::string text(std::string_view k, const std::string& fallback) const {
    auto it = entries_.find(k);
    return it == entries_.end() ? fallback : it->second.value;
  }

 private:
  std::map<std::string, Entry, std::less<>> entries_;
};

void require(bool ok, const std::string& what, int line) {
  if (!ok) throw ParseError(what, line);
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

MeasureSummary summarize(const std::vector<double>& t, const std::vector<double>& v) {
  MeasureSummary m;
  if (auto p = first_local_maximum(t, v)) {
    m.t_first_max = p->first;
    m.first_max = p->second;
  }
  m.final_value = v.back();
  return m;
}

std::string opt_number(const std::optional<double>& v) { return format_number(v ? *v : kNaN); }

std::filesystem::path resolve_output(const ScenarioConfig& cfg, const RunOptions& opt) {
  std::filesystem::path p = cfg.output_path;
  if (!opt.out_dir.empty() && p.is_relative()) p = std::filesystem::path(opt.out_dir) / p;
  return p;
}

void ensure_parent(const std::filesystem::path& p) {
  const auto parent = p.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory '" + parent.string() + "': " + ec.message());
}

std::filesystem::path fits_path(const std::filesystem::path& p) {
  return p.parent_path() / (p.stem().string() + "_fits" + p.extension().string());
}

CsvTable trajectory_table(const NegativityTrajectory& traj, const StateDiagnostics& diag) {
  CsvTable t;
  t.header = {"t", "N12", "N01", "N0_12", "N1_02", "N2_01", "tau", "min_symplectic_eig", "purity_nems"};
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& p = traj.points[k];
    t.add_row({format_number(traj.times[k]), format_number(p.N12), format_number(p.N01), format_number(p.N0_12),
               format_number(p.N1_02), format_number(p.N2_01), format_number(p.tau),
               format_number(diag.min_symplectic_eig[k]), format_number(diag.purity_nems[k])});
  }
  return t;
}

std::vector<std::string> fit_row(const FitResult* r, FitModel model, const std::string& target, std::size_t n,
                                 const std::string& note) {
  std::vector<std::string> row{std::string(to_string(model)), target, std::to_string(n)};
  const auto& names = coefficient_names(model);
  for (std::size_t k = 0; k < 3; ++k) {
    if (k < names.size()) {
      row.push_back(names[k]);
      row.push_back(format_number(r ? r->coefficients(static_cast<Eigen::Index>(k)) : kNaN));
    } else {
      row.emplace_back();
      row.emplace_back();
    }
  }
  row.push_back(format_number(r ? r->max_relative_error : kNaN));
  row.push_back(r && r->converged ? "true" : "false");
  row.push_back(sanitize(note));
  return row;
}

}  // namespace

std::string_view to_string(Scenario s) {
  for (const auto& [name, value] : scenario_names()) {
    if (value == s) return name;
  }
  return "?";
}

std::string_view to_string(SweepVar v) {
  if (v == SweepVar::None) return "none";
  for (const auto& [name, value] : sweep_names()) {
    if (value == v) return name;
  }
  return "?";
}

std::vector<double> ScenarioConfig::sweep_grid() const {
  if (!is_sweep()) return {};
  std::vector<double> g(sweep_steps);
  for (int k = 0; k < sweep_steps; ++k) {
    g[k] = sweep_steps == 1 ? sweep_min : sweep_min + (sweep_max - sweep_min) * k / (sweep_steps - 1);
  }
  return g;
}

ScenarioConfig ScenarioConfig::at(double x) const {
  ScenarioConfig c = *this;
  switch (sweep_var) {
    case SweepVar::Kappa:
      c.system.kappa1 = c.system.kappa2 = x;
      break;
    case SweepVar::Alpha:
      c.initial = InitialState::thermal(x);
      break;
    case SweepVar::NBar:
      c.bath.n_bar = x;
      break;
    case SweepVar::Zeta:
      c.bath.zeta = x;
      break;
    case SweepVar::None:
      break;
  }
  return c;
}

bool ScenarioConfig::is_open() const {
  return scenario == Scenario::Open || sweep_var == SweepVar::NBar || sweep_var == SweepVar::Zeta ||
         bath.zeta > 0.0;
}

ScenarioConfig parse_config(std::string_view text) {
  std::map<std::string, Entry, std::less<>> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, "expected key=value, got '" + line + "'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(std::find(std::begin(kKeys), std::end(kKeys), key) != std::end(kKeys), "unknown key '" + key + "'",
            lineno);
    require(!value.empty(), "empty value for '" + key + "'", lineno);
    require(entries.count(key) == 0, "duplicate key '" + key + "'", lineno);
    entries.emplace(key, Entry{value, lineno});
  }
  const Reader r(std::move(entries));

  ScenarioConfig c;
  const std::string scen = r.text("scenario", "");
  require(!scen.empty(), "missing required key 'scenario'", 0);
  auto sit = scenario_names().find(scen);
  require(sit != scenario_names().end(), "unknown scenario '" + scen + "'", r.line("scenario"));
  c.scenario = sit->second;

  SystemParams& s = c.system;
  s.omega = r.number("omega", std::nullopt);
  require(s.omega > 0.0, "omega must be > 0", r.line("omega"));
  s.Omega = r.number("Omega", 0.05);
  require(s.Omega >= 0.0, "Omega must be >= 0", r.line("Omega"));
  s.nu1 = r.number("nu1", s.omega + s.Omega);
  s.nu2 = r.number("nu2", s.omega + s.Omega);
  require(s.nu1 > 0.0, "nu1 must be > 0", r.line("nu1"));
  require(s.nu2 > 0.0, "nu2 must be > 0", r.line("nu2"));
  require(s.Omega < std::min(s.nu1, s.nu2), "Omega must be < min(nu1, nu2)",
          r.has("Omega") ? r.line("Omega") : std::max(r.line("nu1"), r.line("nu2")));
  const double kappa = r.number("kappa", 0.0);
  require(kappa >= 0.0, "kappa must be >= 0", r.line("kappa"));
  s.kappa1 = r.number("kappa1", kappa);
  s.kappa2 = r.number("kappa2", kappa);
  require(s.kappa1 >= 0.0, "kappa1 must be >= 0", r.line("kappa1"));
  require(s.kappa2 >= 0.0, "kappa2 must be >= 0", r.line("kappa2"));

  const double alpha = r.number("alpha", 1.0);
  require(alpha >= 1.0, "alpha must be >= 1", r.line("alpha"));
  c.initial = alpha == 1.0 ? InitialState::coherent() : InitialState::thermal(alpha);
  c.bath.zeta = r.number("zeta", 0.0);
  c.bath.n_bar = r.number("n_bar", 0.0);
  require(c.bath.zeta >= 0.0, "zeta must be >= 0", r.line("zeta"));
  require(c.bath.n_bar >= 0.0, "n_bar must be >= 0", r.line("n_bar"));

  c.dt = r.number("dt", 0.01);
  c.t_max = r.number("t_max", 30.0);
  require(c.dt > 0.0, "dt must be > 0", r.line("dt"));
  require(c.t_max > c.dt, "t_max must exceed dt", r.has("t_max") ? r.line("t_max") : r.line("dt"));

  SweepVar implied = SweepVar::None;
  switch (c.scenario) {
    case Scenario::SweepKappa: implied = SweepVar::Kappa; break;
    case Scenario::SweepAlpha: implied = SweepVar::Alpha; break;
    case Scenario::SweepNbar: implied = SweepVar::NBar; break;
    case Scenario::SweepZeta: implied = SweepVar::Zeta; break;
    default: break;
  }
  if (r.has("sweep_var")) {
    const std::string v = r.text("sweep_var", "");
    auto vit = sweep_names().find(v);
    require(vit != sweep_names().end(), "unknown sweep_var '" + v + "'", r.line("sweep_var"));
    require(implied == SweepVar::None || implied == vit->second,
            "sweep_var '" + v + "' contradicts scenario '" + scen + "'", r.line("sweep_var"));
    require(c.scenario == Scenario::FitReport || implied != SweepVar::None,
            "sweep_var is only valid for sweep and fit_report scenarios", r.line("sweep_var"));
    c.sweep_var = vit->second;
  } else {
    require(c.scenario != Scenario::FitReport, "fit_report needs sweep_var", 0);
    c.sweep_var = implied;
  }

  if (c.is_sweep()) {
    c.sweep_min = r.number("sweep_min", std::nullopt);
    c.sweep_max = r.number("sweep_max", std::nullopt);
    const double steps = r.number("sweep_steps", std::nullopt);
    require(steps >= 1.0 && steps == std::floor(steps) && steps <= 1e6, "sweep_steps must be a positive integer",
            r.line("sweep_steps"));
    c.sweep_steps = static_cast<int>(steps);
    require(c.sweep_max >= c.sweep_min, "sweep_max must be >= sweep_min", r.line("sweep_max"));
    require(c.sweep_steps == 1 || c.sweep_max > c.sweep_min, "sweep grid must be strictly ascending",
            r.line("sweep_max"));
    const double lower = c.sweep_var == SweepVar::Alpha ? 1.0 : 0.0;
    require(c.sweep_min >= lower,
            "sweep_min must be >= " + format_number(lower) + " for " + std::string(to_string(c.sweep_var)),
            r.line("sweep_min"));
  } else {
    for (const char* k : {"sweep_min", "sweep_max", "sweep_steps"}) {
      require(!r.has(k), std::string(k) + " is only valid for sweep scenarios", r.line(k));
    }
  }

  c.output_path = r.text("output_path", std::string(to_string(c.scenario)) + ".csv");
  return c;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw IoError("read from '" + path + "' failed");
  return parse_config(text.str());
}

std::vector<CovarianceMatrix> simulate_covariances(const ScenarioConfig& cfg, const std::vector<double>& times) {
  const CovarianceMatrix gamma0 = cfg.initial.covariance();
  if (cfg.is_open()) return evolve_open(gamma0, nems_damped(cfg.system, cfg.bath), times);
  return closed_covariances_parallel(gamma0, cfg.system, times);
}

SweepPoint evaluate_sweep_point(const ScenarioConfig& base, double x) {
  SweepPoint p;
  p.x = x;
  p.period = kNaN;
  try {
    const ScenarioConfig cfg = base.at(x);
    const std::vector<double> times = uniform_grid(cfg.t_max, cfg.dt);
    std::vector<CovarianceMatrix> gammas;
    if (cfg.is_open()) {
      gammas = evolve_open(cfg.initial.covariance(), nems_damped(cfg.system, cfg.bath), times);
    } else {
      gammas = closed_covariances_serial(cfg.initial.covariance(), cfg.system, times);
    }
    for (const auto& g : gammas) p.max_abs_gamma = std::max(p.max_abs_gamma, max_abs(g.matrix()));
    const NegativityTrajectory traj = measure_trajectory_serial(times, gammas);
    p.N12 = summarize(times, traj.column(&NegativityPoint::N12));
    p.N01 = summarize(times, traj.column(&NegativityPoint::N01));
    p.tau = summarize(times, traj.column(&NegativityPoint::tau));
    if (!cfg.is_open() && cfg.system.is_resonant()) {
      std::vector<Matrix2> ci;
      ci.reserve(gammas.size());
      for (const auto& g : gammas) ci.push_back(BlockDecomposition::from_covariance(g).C_I);
      try {
        p.period = oscillation_period_from_correlation(times, ci);
      } catch (const NotEnoughData&) {
        p.period = kNaN;
      }
    }
    if (p.max_abs_gamma > kPrecisionHorizon) p.status = "ok (precision horizon exceeded)";
  } catch (const std::exception& e) {
    p.status = std::string("error: ") + e.what();
  }
  return p;
}

std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg) {
  const std::vector<double> grid = cfg.sweep_grid();
  std::vector<SweepPoint> out(grid.size());
  const long n = static_cast<long>(grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long k = 0; k < n; ++k) out[k] = evaluate_sweep_point(cfg, grid[k]);
  return out;
}

CsvTable sweep_table(const ScenarioConfig& cfg, const std::vector<SweepPoint>& points) {
  CsvTable t;
  t.header = {std::string(to_string(cfg.sweep_var)), "status", "period"};
  for (const char* m : {"N12", "N01", "tau"}) {
    t.header.push_back(std::string("t_first_max_") + m);
    t.header.push_back(std::string("first_max_") + m);
    t.header.push_back(std::string("final_") + m);
  }
  for (const auto& p : points) {
    std::vector<std::string> row{format_number(p.x), sanitize(p.status), format_number(p.period)};
    for (const MeasureSummary* m : {&p.N12, &p.N01, &p.tau}) {
      row.push_back(opt_number(m->t_first_max));
      row.push_back(opt_number(m->first_max));
      row.push_back(format_number(m->final_value));
    }
    t.add_row(std::move(row));
  }
  return t;
}

std::vector<std::string> fit_report_header() {
  return {"model", "target", "n_points", "coef1_name", "coef1", "coef2_name", "coef2",
          "coef3_name", "coef3", "max_relative_error", "converged", "note"};
}

CsvTable fit_report_table(const ScenarioConfig& cfg, const std::vector<SweepPoint>& points) {
  CsvTable t;
  t.header = fit_report_header();

  struct Target {
    FitModel model;
    std::string name;
    std::function<std::optional<double>(const SweepPoint&)> value;
  };
  auto first_max = [](MeasureSummary SweepPoint::*m) {
    return [m](const SweepPoint& p) { return (p.*m).first_max; };
  };
  auto t_first_max = [](MeasureSummary SweepPoint::*m) {
    return [m](const SweepPoint& p) { return (p.*m).t_first_max; };
  };
  auto final_value = [](MeasureSummary SweepPoint::*m) {
    return [m](const SweepPoint& p) { return std::optional<double>((p.*m).final_value); };
  };

  std::vector<Target> targets;
  const bool open = cfg.is_open();
  switch (cfg.sweep_var) {
    case SweepVar::Kappa:
      if (open) {
        targets.push_back({FitModel::OffsetInverseSqrt, "t_first_max_tau", t_first_max(&SweepPoint::tau)});
        targets.push_back({FitModel::OffsetInverseSqrt, "t_first_max_N01", t_first_max(&SweepPoint::N01)});
        targets.push_back({FitModel::OffsetInverseSqrt, "t_first_max_N12", t_first_max(&SweepPoint::N12)});
      } else {
        targets.push_back({FitModel::LogGrowth, "first_max_N12", first_max(&SweepPoint::N12)});
        targets.push_back({FitModel::InverseSqrt, "period", [](const SweepPoint& p) {
                             return std::isfinite(p.period) ? std::optional<double>(p.period) : std::nullopt;
                           }});
      }
      break;
    case SweepVar::Alpha:
      targets.push_back({FitModel::ExpSqrtAlpha, "first_max_N12", first_max(&SweepPoint::N12)});
      break;
    case SweepVar::NBar:
    case SweepVar::Zeta:
      targets.push_back({FitModel::OffsetExp, "final_tau", final_value(&SweepPoint::tau)});
      targets.push_back({FitModel::OffsetExp, "final_N01", final_value(&SweepPoint::N01)});
      targets.push_back({FitModel::OffsetExp, "final_N12", final_value(&SweepPoint::N12)});
      break;
    case SweepVar::None:
      break;
  }

  for (const auto& target : targets) {
    std::vector<double> xs, ys;
    for (const auto& p : points) {
      if (p.status.rfind("ok", 0) != 0) continue;
      const auto v = target.value(p);
      // Negativities clipped to zero lie outside the offset-exponential family.
      if (target.model == FitModel::OffsetExp && v && *v <= 0.0) continue;
      if (v && std::isfinite(*v)) {
        xs.push_back(p.x);
        ys.push_back(*v);
      }
    }
    try {
      const FitResult r = fit(target.model, xs, ys);
      t.add_row(fit_row(&r, target.model, target.name, xs.size(), ""));
    } catch (const InvalidArgument& e) {
      t.add_row(fit_row(nullptr, target.model, target.name, xs.size(), e.what()));
    }
  }
  return t;
}

RunSummary run(const ScenarioConfig& cfg, const RunOptions& opt) {
  RunSummary summary;
  const std::filesystem::path out = resolve_output(cfg, opt);
  ensure_parent(out);

  if (cfg.scenario == Scenario::Spectrum) {
    const SpectrumClassification sc = spectrum(cfg.system);
    CsvTable t;
    t.header = {"index", "real", "imag", "threshold", "kind"};
    for (std::size_t k = 0; k < sc.eigenvalues.size(); ++k) {
      t.add_row({std::to_string(k), format_number(sc.eigenvalues[k].real()), format_number(sc.eigenvalues[k].imag()),
                 format_number(sc.threshold), std::string(to_string(sc.kind))});
    }
    write_csv(out.string(), t);
    summary.files.push_back(out.string());
    return summary;
  }

  if (cfg.is_sweep()) {
    const std::vector<SweepPoint> points = run_sweep(cfg);
    for (const auto& p : points) {
      if (p.max_abs_gamma > kPrecisionHorizon) {
        summary.warnings.push_back(std::string(to_string(cfg.sweep_var)) + "=" + format_number(p.x) +
                                   ": covariance entries reach " + format_number(p.max_abs_gamma) +
                                   "; late-time negativities are dominated by roundoff");
      }
    }
    write_csv(out.string(), sweep_table(cfg, points));
    summary.files.push_back(out.string());
    const auto fits = fits_path(out);
    write_csv(fits.string(), fit_report_table(cfg, points));
    summary.files.push_back(fits.string());
    return summary;
  }

  const std::vector<double> times = uniform_grid(cfg.t_max, cfg.dt);
  const std::vector<CovarianceMatrix> gammas = simulate_covariances(cfg, times);
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (max_abs(gammas[k].matrix()) > kPrecisionHorizon) {
      summary.warnings.push_back("covariance entries exceed " + format_number(kPrecisionHorizon) + " from t=" +
                                 format_number(times[k]) + "; later negativities are dominated by roundoff");
      break;
    }
  }
  const NegativityTrajectory traj = measure_trajectory_parallel(times, gammas);
  const StateDiagnostics diag = state_diagnostics_parallel(gammas);
  write_csv(out.string(), trajectory_table(traj, diag));
  summary.files.push_back(out.string());
  return summary;
}

std::string spectrum_report(const ScenarioConfig& cfg) {
  const SpectrumClassification sc = spectrum(cfg.system);
  static const char* const labels[] = {"eta+", "eta-", "pi+", "pi-", "rho+", "rho-"};
  std::ostringstream out;
  out << "eigenvalues of J H (" << (sc.analytic ? "analytic" : "numeric") << ")\n";
  for (std::size_t k = 0; k < sc.eigenvalues.size(); ++k) {
    out << "  " << (sc.analytic ? labels[k] : std::to_string(k).c_str()) << "\t"
        << format_number(sc.eigenvalues[k].real()) << "\t" << format_number(sc.eigenvalues[k].imag()) << "i\n";
  }
  out << "threshold sqrt(omega (nu - Omega)) = " << format_number(sc.threshold) << "\n";
  out << "kappa = " << format_number(cfg.system.kappa1);
  if (!cfg.system.is_symmetric()) out << ", " << format_number(cfg.system.kappa2);
  out << "\nclassification: " << to_string(sc.kind) << "\n";
  return out.str();
}

}  // namespace ionnems
