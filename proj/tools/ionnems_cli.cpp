// ionnems: scenario runner for the ion-NEMS-ion simulator.
//
//   ionnems simulate <config-file> [--out DIR] [--threads N]
//   ionnems spectrum <config-file>
//   ionnems fit <trajectory.csv> --model <name> [--x COL] [--y COL] [--peaks]
//
// Exit codes: 0 ok, 1 config error, 2 numerical error, 3 I/O error.

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "ionnems/csv.hpp"
#include "ionnems/errors.hpp"
#include "ionnems/scenario.hpp"
#include "ionnems/trend_analysis.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kNumerical = 2, kIo = 3 };

int cmd_simulate(const std::string& config, const std::string& out_dir, int threads) {
  if (threads > 0) omp_set_num_threads(threads);
  const ionnems::ScenarioConfig cfg = ionnems::parse_config_file(config);
  if (cfg.scenario == ionnems::Scenario::Spectrum) std::cout << ionnems::spectrum_report(cfg);
  const ionnems::RunSummary s = ionnems::run(cfg, {out_dir});
  for (const auto& w : s.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& f : s.files) std::cout << "wrote " << f << "\n";
  return kOk;
}

int cmd_spectrum(const std::string& config) {
  std::cout << ionnems::spectrum_report(ionnems::parse_config_file(config));
  return kOk;
}

int cmd_fit(const std::string& path, const std::string& model_name, std::string xcol, std::string ycol,
            bool peaks) {
  const ionnems::FitModel model = ionnems::fit_model_from_string(model_name);
  const ionnems::CsvTable table = ionnems::read_csv(path);
  if (table.header.size() < 2) throw ionnems::ParseError("'" + path + "' needs at least two columns", 1);
  if (xcol.empty()) xcol = table.header[0];
  if (ycol.empty()) ycol = table.header[1];
  std::vector<double> x = table.numeric_column(xcol);
  std::vector<double> y = table.numeric_column(ycol);
  if (peaks) {
    const ionnems::PeakList p = ionnems::local_maxima(x, y);
    x = p.times;
    y = p.values;
  }
  std::vector<double> fx, fy;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (std::isfinite(x[k]) && std::isfinite(y[k])) {
      fx.push_back(x[k]);
      fy.push_back(y[k]);
    }
  }
  const ionnems::FitResult r = ionnems::fit(model, fx, fy);

  ionnems::CsvTable out;
  out.header = ionnems::fit_report_header();
  std::vector<std::string> row{std::string(ionnems::to_string(model)), ycol + (peaks ? " (peaks)" : ""),
                               std::to_string(fx.size())};
  for (std::size_t k = 0; k < 3; ++k) {
    if (k < r.names.size()) {
      row.push_back(r.names[k]);
      row.push_back(ionnems::format_number(r.coefficients(static_cast<Eigen::Index>(k))));
    } else {
      row.emplace_back();
      row.emplace_back();
    }
  }
  row.push_back(ionnems::format_number(r.max_relative_error));
  row.push_back(r.converged ? "true" : "false");
  row.emplace_back();
  out.add_row(std::move(row));
  std::cout << out.to_string();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ion-NEMS-ion Gaussian entanglement simulator"};
  app.require_subcommand(1);

  std::string config, out_dir, csv, model, xcol, ycol;
  int threads = 0;
  bool peaks = false;

  auto* sim = app.add_subcommand("simulate", "Run a scenario and write its CSV files");
  sim->add_option("config", config, "Scenario config file")->required();
  sim->add_option("--out", out_dir, "Directory for relative output paths");
  sim->add_option("--threads", threads, "OpenMP threads (default: runtime choice)")->check(CLI::PositiveNumber);

  auto* spec = app.add_subcommand("spectrum", "Print the eigenvalues of J H and the dynamics classification");
  spec->add_option("config", config, "Scenario config file")->required();

  auto* fitc = app.add_subcommand("fit", "Fit a trend law to two columns of a CSV file");
  fitc->add_option("csv", csv, "Input CSV")->required();
  fitc->add_option("--model", model,
                   "LogGrowth, InverseSqrt, ExpSqrtAlpha, OffsetExp, PureExp or OffsetInverseSqrt")
      ->required();
  fitc->add_option("--x", xcol, "x column (default: first)");
  fitc->add_option("--y", ycol, "y column (default: second)");
  fitc->add_flag("--peaks", peaks, "Fit the local maxima of y instead of every row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config, out_dir, threads);
    if (spec->parsed()) return cmd_spectrum(config);
    return cmd_fit(csv, model, xcol, ycol, peaks);
  } catch (const ionnems::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const ionnems::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ionnems::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ionnems::NumericalError& e) {
    std::cerr << "numerical error: " << e.what();
    if (!std::isnan(e.time())) std::cerr << " (t=" << e.time() << ")";
    std::cerr << "\n";
    return kNumerical;
  } catch (const ionnems::NotEnoughData& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  }
}
