#include <cmath>
#include <random>

#include "doctest.h"
#include "ionnems/closed_dynamics.hpp"
#include "ionnems/entanglement.hpp"
#include "ionnems/errors.hpp"
#include "ionnems/kernels.hpp"
#include "ionnems/trend_analysis.hpp"
#include "test_support.hpp"

using namespace ionnems;

namespace {

// Rotation of one mode's phase space: a passive single-mode symplectic map.
Matrix local_rotation(int n_modes, int mode, double angle) {
  Matrix s = Matrix::Identity(2 * n_modes, 2 * n_modes);
  s(2 * mode, 2 * mode) = std::cos(angle);
  s(2 * mode, 2 * mode + 1) = std::sin(angle);
  s(2 * mode + 1, 2 * mode) = -std::sin(angle);
  s(2 * mode + 1, 2 * mode + 1) = std::cos(angle);
  return s;
}

std::vector<CovarianceMatrix> closed_trajectory(double kappa, double t_max, double dt) {
  const SystemParams s = SystemParams::resonant(0.5, kappa, 0.05);
  return closed_covariances_serial(CovarianceMatrix::vacuum(3), s, uniform_grid(t_max, dt));
}

}  // namespace

TEST_SUITE("entanglement") {

TEST_CASE("vacuum is unentangled") {
  const CovarianceMatrix v = CovarianceMatrix::vacuum(3);
  for (const Bipartition& p : {Bipartition{0}, Bipartition{1}, Bipartition{2}, Bipartition{0, 2}}) {
    CHECK(log_negativity(v, p) == 0.0);
    CHECK(separability_check(v, p));
  }
  CHECK(tripartite_min_negativity(v) == 0.0);
}

TEST_CASE("two-mode squeezed state: N = 2r in the natural-log convention") {
  for (double r : {0.1, 0.5, 1.3}) {
    const CovarianceMatrix g(testing::two_mode_squeezed(r));
    CHECK(log_negativity(g, {1}) == doctest::Approx(2.0 * r).epsilon(1e-12));
    CHECK(log_negativity(g, {0}) == doctest::Approx(2.0 * r).epsilon(1e-12));
  }
  CHECK_FALSE(separability_check(CovarianceMatrix(testing::two_mode_squeezed(0.5)), {1}));
}

TEST_CASE("unphysical input is rejected") {
  CHECK_THROWS_AS(log_negativity(CovarianceMatrix(0.3 * Matrix::Identity(4, 4)), {1}), InvalidArgument);
}

TEST_CASE("partition-side symmetry and the min property") {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix s = testing::random_symplectic(rng, 3, 0.5);
    const CovarianceMatrix g(0.5 * s * s.transpose() + 0.1 * Matrix::Identity(6, 6));
    for (const Bipartition& p : {Bipartition{0}, Bipartition{1}, Bipartition{2}}) {
      CHECK(std::abs(log_negativity(g, p) - log_negativity(g, p.complement(3))) <= 1e-10);
    }
    const NegativityPoint pt = NegativityPoint::measure(g);
    CHECK(pt.tau <= pt.N0_12);
    CHECK(pt.tau <= pt.N1_02);
    CHECK(pt.tau <= pt.N2_01);
    CHECK(pt.tau == std::min({pt.N0_12, pt.N1_02, pt.N2_01}));
    CHECK(tripartite_min_negativity(g) == pt.tau);
    for (double x : {pt.N12, pt.N01, pt.N0_12, pt.N1_02, pt.N2_01, pt.tau}) CHECK(x >= 0.0);

    for (const Bipartition& p : {Bipartition{0}, Bipartition{1}, Bipartition{2}}) {
      CHECK(separability_check(g, p) == (log_negativity(g, p) == 0.0));
    }
  }
}

TEST_CASE("one-vs-two negativities use the expected momentum flips") {
  std::mt19937 rng(43);
  const Matrix s = testing::random_symplectic(rng, 3, 0.6);
  const CovarianceMatrix g(0.5 * s * s.transpose());
  Eigen::VectorXd p(6);
  p << 1, -1, 1, 1, 1, -1;  // N_{1|02} flips modes 0 and 2
  const Matrix flipped = p.asDiagonal() * g.matrix() * p.asDiagonal();
  double expect = 0.0;
  for (double mu : symplectic_eigenvalues(2.0 * flipped))
    if (mu < 1.0 - kNegativityClip) expect -= std::log(mu);
  CHECK(NegativityPoint::measure(g).N1_02 == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("ion-ion negativity three ways") {
  CHECK(ion_ion_negativity_local(Matrix2::Identity()) == 0.0);
  CHECK(ion_ion_negativity_from_correlation(Matrix2::Zero()) == 0.0);
  CHECK_THROWS_AS(ion_ion_negativity_local(0.3 * Matrix2::Identity()), InvalidArgument);

  for (double kappa : {0.3, 1.0, 3.0}) {
    const auto traj = closed_trajectory(kappa, 10.0, 0.05);
    double peak = 0.0;
    for (const auto& g : traj) {
      // Beyond this the ion blocks carry ~eps |gamma| rounding in every route.
      if (max_abs(g.matrix()) > 1e5) break;
      const BlockDecomposition b = BlockDecomposition::from_covariance(g);
      const double full = log_negativity(g.reduced({1, 2}), {1});
      CHECK(std::abs(ion_ion_negativity_local(b.A_I) - full) <= 1e-9);
      CHECK(std::abs(ion_ion_negativity_from_correlation(b.C_I) - full) <= 1e-9);
      peak = std::max(peak, full);
    }
    CHECK(peak > 0.0);
  }
}

TEST_CASE("local unitaries leave N12 unchanged") {
  const auto traj = closed_trajectory(3.0, 8.0, 0.4);
  for (const auto& g : traj) {
    const Matrix u = local_rotation(3, 2, 0.83) * local_rotation(3, 1, -1.7);
    const CovarianceMatrix rotated(symmetrized(u * g.matrix() * u.transpose()));
    CHECK(std::abs(NegativityPoint::measure(rotated).N12 - NegativityPoint::measure(g).N12) <= 1e-9);
  }
}

TEST_CASE("beam-splitter-only coupling never entangles") {
  for (const auto& g : closed_trajectory(0.0, 30.0, 0.1)) CHECK(NegativityPoint::measure(g).N12 == 0.0);
}

TEST_CASE("larger coupling: larger N12 amplitude, shorter period") {
  const std::vector<double> times = uniform_grid(20.0, 0.01);
  auto n12 = [&](double kappa) {
    const auto gs = closed_covariances_serial(CovarianceMatrix::vacuum(3), SystemParams::resonant(0.5, kappa, 0.05),
                                              times);
    return measure_trajectory_serial(times, gs).column(&NegativityPoint::N12);
  };
  const auto weak = n12(1.0);
  const auto strong = n12(3.0);
  const auto fw = first_local_maximum(times, weak);
  const auto fs = first_local_maximum(times, strong);
  REQUIRE(fw);
  REQUIRE(fs);
  CHECK(fs->second > fw->second);
  CHECK(fs->first < fw->first);
}

TEST_CASE("thermal noise suppresses the first N12 maximum") {
  const SystemParams s = SystemParams::resonant(0.5, 3.0, 0.05);
  const std::vector<double> times = uniform_grid(6.0, 0.01);
  double previous = 1e300;
  for (int alpha = 1; alpha <= 10; ++alpha) {
    std::vector<CovarianceMatrix> gs;
    for (double t : times) gs.push_back(evolve_closed_thermal(alpha, s, t));
    const auto peak = first_local_maximum(times, measure_trajectory_serial(times, gs).column(&NegativityPoint::N12));
    REQUIRE(peak);
    CHECK(peak->second <= previous + 1e-12);
    previous = peak->second;
  }
}

}  // TEST_SUITE
