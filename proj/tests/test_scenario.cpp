#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "ionnems/csv.hpp"
#include "ionnems/errors.hpp"
#include "ionnems/kernels.hpp"
#include "ionnems/open_dynamics.hpp"
#include "ionnems/scenario.hpp"

using namespace ionnems;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ionnems_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int parse_error_line(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("uniform grid") {
  const auto g = uniform_grid(1.0, 0.1);
  REQUIRE(g.size() == 11);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(uniform_grid(0.0, 0.1).size() == 1);
  CHECK_THROWS_AS(uniform_grid(1.0, 0.0), InvalidArgument);
}

TEST_CASE("serial and parallel kernels are bit-identical") {
  const SystemParams s = SystemParams::resonant(0.5, 3.0, 0.05);
  const auto times = uniform_grid(8.0, 0.01);
  const auto a = closed_covariances_serial(CovarianceMatrix::vacuum(3), s, times);
  const auto b = closed_covariances_parallel(CovarianceMatrix::vacuum(3), s, times);
  REQUIRE(a.size() == b.size());
  bool same = true;
  for (std::size_t k = 0; k < a.size(); ++k) same = same && (a[k].matrix().array() == b[k].matrix().array()).all();
  CHECK(same);

  const auto ma = measure_trajectory_serial(times, a);
  const auto mb = measure_trajectory_parallel(times, b);
  for (auto field : {&NegativityPoint::N12, &NegativityPoint::N01, &NegativityPoint::tau}) {
    CHECK(ma.column(field) == mb.column(field));
  }
}

TEST_CASE("kernel errors propagate from worker threads") {
  std::vector<CovarianceMatrix> bad(50, CovarianceMatrix::vacuum(3));
  bad[37] = CovarianceMatrix(0.1 * Matrix::Identity(6, 6));
  CHECK_THROWS_AS(measure_trajectory_parallel(uniform_grid(4.9, 0.1), bad), InvalidArgument);
}

}  // TEST_SUITE

TEST_SUITE("csv") {

TEST_CASE("number formatting") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(1234567.891011121) == "1234567.89101");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("write and read back") {
  const fs::path dir = scratch_dir("csv");
  CsvTable t;
  t.header = {"x", "y"};
  t.add_row({"1", "2.5"});
  t.add_row({"2", "nan"});
  CHECK_THROWS_AS(t.add_row({"3"}), InvalidArgument);
  write_csv((dir / "t.csv").string(), t);
  const CsvTable r = read_csv((dir / "t.csv").string());
  CHECK(r.header == t.header);
  CHECK(r.rows == t.rows);
  CHECK(std::isnan(r.numeric_column("y")[1]));
  CHECK_THROWS_AS(r.column_index("z"), InvalidArgument);

  std::ofstream(dir / "ragged.csv") << "a,b\n1,2\n3\n";
  CHECK_THROWS_AS(read_csv((dir / "ragged.csv").string()), ParseError);
  std::ofstream(dir / "text.csv") << "a\nfoo\n";
  CHECK_THROWS_AS(read_csv((dir / "text.csv").string()).numeric_column("a"), ParseError);
  CHECK_THROWS_AS(read_csv((dir / "missing.csv").string()), IoError);
  CHECK_THROWS_AS(write_csv((dir / "no" / "such" / "dir" / "x.csv").string(), t), IoError);
}

}  // TEST_SUITE

TEST_SUITE("scenario") {

TEST_CASE("closed zero-temperature config with defaults") {
  const ScenarioConfig c = parse_config("scenario=closed_zero_t\nomega=0.5\nkappa=3");
  CHECK(c.scenario == Scenario::ClosedZeroT);
  CHECK(c.system.omega == 0.5);
  CHECK(c.system.kappa1 == 3.0);
  CHECK(c.system.kappa2 == 3.0);
  CHECK(c.system.Omega == 0.05);
  CHECK(c.system.nu1 == doctest::Approx(0.55));
  CHECK(c.system.is_resonant());
  CHECK(c.dt == 0.01);
  CHECK(c.t_max == 30.0);
  CHECK_FALSE(c.is_open());
  CHECK(c.output_path == "closed_zero_t.csv");
}

TEST_CASE("thermal config, comments and whitespace") {
  const ScenarioConfig c = parse_config("# thermal\n scenario = closed_thermal \n\nomega=0.5 # NEMS\nkappa=3\nalpha=5\n");
  CHECK(c.scenario == Scenario::ClosedThermal);
  CHECK(c.initial.kind == InitialKind::NemsThermal);
  CHECK(c.initial.alpha == 5.0);
}

TEST_CASE("open and sweep configs") {
  const ScenarioConfig o = parse_config("scenario=open\nomega=0.5\nkappa=1\nzeta=0.01\nn_bar=4.5\n");
  CHECK(o.is_open());
  CHECK(o.bath.zeta == 0.01);
  CHECK(o.bath.n_bar == 4.5);

  const ScenarioConfig s =
      parse_config("scenario=sweep_kappa\nomega=0.5\nsweep_var=kappa\nsweep_min=1\nsweep_max=40\nsweep_steps=40\n");
  CHECK(s.is_sweep());
  const auto grid = s.sweep_grid();
  REQUIRE(grid.size() == 40);
  CHECK(grid.front() == 1.0);
  CHECK(grid.back() == 40.0);
  CHECK(s.at(7.0).system.kappa1 == 7.0);
  CHECK(s.at(7.0).system.kappa2 == 7.0);
}

TEST_CASE("config errors name the line") {
  CHECK(parse_error_line("scenario=closed_zero_t\nkappa=3\n") == 0);  // missing omega
  CHECK(parse_error_line("scenario=closed_zero_t\nomega=0.5\nfoo=1\n") == 3);  // unknown key
  CHECK(parse_error_line("scenario=open\nomega=0.5\nkappa=abc\n") == 3);  // unparsable
  CHECK(parse_error_line("scenario=open\nomega=0.5\nomega=0.6\n") == 3);  // duplicate
  CHECK(parse_error_line("omega=0.5\nscenario=bogus\n") == 2);
  CHECK(parse_error_line("scenario=open\nomega=0.5\ndt=0\n") == 3);
  CHECK(parse_error_line("scenario=open\nomega=0.5\nt_max=0.005\n") == 3);
  CHECK(parse_error_line("omega=0.5\nalpha=0.5\nscenario=closed_thermal\n") == 2);
  CHECK(parse_error_line("scenario=open\nomega=0.5\nno_equals_sign\n") == 3);
  CHECK(parse_error_line("scenario=sweep_kappa\nomega=0.5\n") >= 0);
  CHECK(parse_error_line("scenario=closed_zero_t\nomega=0.5\nsweep_var=kappa\n") >= 0);
  CHECK(parse_error_line("scenario=sweep_kappa\nomega=0.5\nsweep_var=kappa\nsweep_min=3\nsweep_max=1\nsweep_steps=3\n") >= 0);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/ionnems.cfg"), IoError);
}

TEST_CASE("trajectory run: columns, tau = min, determinism") {
  const fs::path dir = scratch_dir("run");
  const ScenarioConfig c = parse_config("scenario=closed_zero_t\nomega=0.5\nkappa=1\nt_max=5\noutput_path=traj.csv\n");
  const RunSummary first = run(c, {dir.string()});
  REQUIRE(first.files.size() == 1);
  const std::string bytes = slurp(first.files[0]);
  run(c, {dir.string()});
  CHECK(slurp(first.files[0]) == bytes);

  const CsvTable t = read_csv(first.files[0]);
  CHECK(t.header == std::vector<std::string>{"t", "N12", "N01", "N0_12", "N1_02", "N2_01", "tau",
                                             "min_symplectic_eig", "purity_nems"});
  CHECK(t.rows.size() == 501);
  const auto a = t.numeric_column("N0_12"), b = t.numeric_column("N1_02"), d = t.numeric_column("N2_01");
  const auto tau = t.numeric_column("tau");
  const auto times = t.numeric_column("t");
  for (std::size_t k = 0; k < tau.size(); ++k) {
    CHECK(tau[k] == std::min({a[k], b[k], d[k]}));
    if (k > 0) CHECK(times[k] > times[k - 1]);
  }
}

TEST_CASE("kappa = 0 run writes an all-zero N12 column") {
  const fs::path dir = scratch_dir("zero");
  const RunSummary r = run(parse_config("scenario=closed_zero_t\nomega=0.5\nkappa=0\nt_max=10\n"), {dir.string()});
  for (double v : read_csv(r.files[0]).numeric_column("N12")) CHECK(v == 0.0);
}

TEST_CASE("open run agrees with the library") {
  const fs::path dir = scratch_dir("open");
  const ScenarioConfig c = parse_config("scenario=open\nomega=0.5\nkappa=1\nzeta=0.01\nn_bar=4.5\nt_max=2\ndt=0.5\n");
  const RunSummary r = run(c, {dir.string()});
  const auto n12 = read_csv(r.files[0]).numeric_column("N12");
  const auto gs = evolve_open(CovarianceMatrix::vacuum(3), nems_damped(c.system, c.bath), uniform_grid(2.0, 0.5));
  CHECK(n12.back() == doctest::Approx(NegativityPoint::measure(gs.back()).N12).epsilon(1e-11));
}

TEST_CASE("sweeps keep one row per grid point") {
  const fs::path dir = scratch_dir("sweep");
  const ScenarioConfig c = parse_config(
      "scenario=sweep_kappa\nomega=0.5\nt_max=8\nsweep_var=kappa\nsweep_min=1\nsweep_max=4\nsweep_steps=4\n");
  const RunSummary r = run(c, {dir.string()});
  REQUIRE(r.files.size() == 2);
  const CsvTable sweep = read_csv(r.files[0]);
  CHECK(sweep.rows.size() == 4);
  for (const auto& row : sweep.rows) CHECK(row[sweep.column_index("status")].rfind("ok", 0) == 0);
  const CsvTable fits = read_csv(r.files[1]);
  CHECK(fits.header == fit_report_header());
  CHECK(fits.rows.size() >= 1);

  // A failing point is reported, not dropped.
  const SweepPoint bad = evaluate_sweep_point(c, -1.0);
  CHECK(bad.status.rfind("error", 0) == 0);
}

TEST_CASE("spectrum scenario") {
  const ScenarioConfig c = parse_config("scenario=spectrum\nomega=0.5\nkappa=3\n");
  const std::string text = spectrum_report(c);
  CHECK(text.find("Mixed") != std::string::npos);
  CHECK(text.find("1.11803") != std::string::npos);
  CHECK(spectrum_report(parse_config("scenario=spectrum\nomega=0.5\nkappa=0\n")).find("Rotational") !=
        std::string::npos);

  const fs::path dir = scratch_dir("spectrum");
  const CsvTable t = read_csv(run(c, {dir.string()}).files[0]);
  CHECK(t.rows.size() == 6);
  CHECK(t.numeric_column("threshold")[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("unwritable output is an I/O error") {
  const fs::path dir = scratch_dir("io");
  std::ofstream(dir / "blocker") << "x";
  const ScenarioConfig c = parse_config("scenario=closed_zero_t\nomega=0.5\nkappa=1\nt_max=1\noutput_path=blocker/out.csv\n");
  CHECK_THROWS_AS(run(c, {dir.string()}), IoError);
}

}  // TEST_SUITE
