#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "betalab/error.hpp"
#include "betalab/rates.hpp"
#include "oracles.hpp"

using namespace betalab;

namespace {

const EquilibriumResult& gaussian_eq() {
  static const auto eq = solve_equilibrium(Potential::gaussian());
  return eq;
}

}  // namespace

TEST_CASE("I_V vanishes at the equilibrium measure and is positive elsewhere") {
  const auto& eq = gaussian_eq();
  const auto v = Potential::gaussian();
  const auto at = rate_iv(eq, v, eq.density);
  CHECK(std::abs(at.value) <= 1e-4);
  CHECK(at.value == doctest::Approx(at.sigma_term + at.potential_term - at.c_v));
  CHECK_FALSE(at.regularization.has_value());

  // A wider semicircle costs energy: radius 3 gives -Sigma = 1/4 - ln(3/2), int V = 9/8.
  const auto wide = GridMeasure::from_density(-3.0, 3.0, 4096, [](double x) {
    return std::abs(x) < 3.0 ? 2.0 * std::sqrt(9.0 - x * x) / (9.0 * std::numbers::pi) : 0.0;
  });
  const double expected = 0.25 - std::log(1.5) + 9.0 / 8.0 - 0.75;
  CHECK(rate_iv(eq, v, wide).value == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("DOS rate vanishes on every translate of the reflected equilibrium") {
  const auto& eq = gaussian_eq();
  const auto v = Potential::gaussian();
  for (double b : {2.0, 2.5, 3.0}) {
    const Measure nu = reflect_shift(eq.density, b);
    const auto general = rate_idos(eq, v, nu);
    const auto shortcut = rate_idos_gaussian(nu);
    CHECK(general.value <= 1e-4);
    CHECK(general.value >= -1e-4);
    CHECK(std::abs(general.value - shortcut.value) <= 1e-6);
  }
}

TEST_CASE("DOS rate: Gaussian shortcut agrees on other measures") {
  const auto& eq = gaussian_eq();
  const auto v = Potential::gaussian();
  const Measure u = GridMeasure(0.0, 2.0, {1.0, 1.0, 1.0});
  CHECK(std::abs(rate_idos(eq, v, u).value - rate_idos_gaussian(u).value) <= 1e-6);
  // Uniform on [0, 2]: -Sigma = 3/2 - ln 2, Var = 1/3.
  CHECK(rate_idos_gaussian(u).value == doctest::Approx(1.5 - std::log(2.0) + 1.0 / 6.0 - 0.75).epsilon(1e-12));
  const Measure atoms = AtomicMeasure::equal_weight({0.0, 0.5, 1.0, 3.0});
  const auto a = rate_idos(eq, v, atoms);
  REQUIRE(a.regularization.has_value());
  CHECK(*a.regularization == doctest::Approx(2.0 * std::log(4.0)));
  CHECK(std::abs(a.value - rate_idos_gaussian(atoms).value) <= 1e-6);
  RateOptions ro;
  ro.reg_m = 3.0;
  CHECK(*rate_idos(eq, v, atoms, ro).regularization == 3.0);
}

TEST_CASE("half-line inputs are enforced") {
  const auto& eq = gaussian_eq();
  const Measure bad = AtomicMeasure::equal_weight({-1.0, 1.0});
  CHECK_THROWS_AS(rate_idos(eq, Potential::gaussian(), bad), InvalidArgument);
  CHECK_THROWS_AS(rate_cal_i(eq, Potential::gaussian(), 2.0, bad), InvalidArgument);
}

TEST_CASE("shifted rate: zero at the edge, positive away from it") {
  const auto& eq = gaussian_eq();
  const auto v = Potential::gaussian();
  const Measure nu = nu_limit(eq);
  CHECK(std::abs(rate_cal_i(eq, v, 2.0, nu).value) <= 1e-4);
  // Moving the anchor by d adds d^2 / 2 for the Gaussian.
  CHECK(rate_cal_i(eq, v, 2.5, nu).value == doctest::Approx(0.125).epsilon(1e-3));
  CHECK(rate_cal_i(eq, v, 1.0, nu).value == doctest::Approx(0.5).epsilon(1e-3));
  // The interval version is the smallest value over [c, c + delta].
  const double d = rate_cal_i_delta(eq, v, 1.0, 0.5, nu);
  CHECK(d <= rate_cal_i(eq, v, 1.0, nu).value + 1e-12);
  CHECK(d == doctest::Approx(rate_cal_i(eq, v, 1.5, nu).value).epsilon(1e-6));
  CHECK(rate_cal_i_delta(eq, v, 1.0, 2.0, nu) == doctest::Approx(rate_cal_i(eq, v, 2.0, nu).value).epsilon(1e-6));
  CHECK_THROWS_AS(rate_cal_i_delta(eq, v, 1.0, -0.1, nu), InvalidArgument);
}

TEST_CASE("conditional rate and projection") {
  const auto& eq = gaussian_eq();
  const auto v = Potential::gaussian();
  CHECK(projection_j(eq, v, 2.0) == 0.0);
  CHECK(projection_j(eq, v, 3.0) == 0.0);
  const double c = 1.5;
  const auto con = constrained_equilibrium(v, eq, c);
  REQUIRE(con.converged);
  CHECK(projection_j(eq, v, c) == doctest::Approx(con.value));
  CHECK(con.value == doctest::Approx(oracle::gaussian_left_rate(c)).epsilon(5e-3));

  // The constrained minimizer, seen from c, has (nearly) zero conditional rate.
  const Measure star = reflect_shift(con.minimizer, c);
  const auto at = rate_cal_j(eq, v, con, star);
  CHECK(std::abs(at.value) <= 5e-3);
  CHECK(at.offset == con.value);
  // Any other half-line measure has a nonnegative conditional rate.
  CHECK(rate_cal_j(eq, v, con, nu_limit(eq)).value >= -1e-4);
  CHECK(rate_cal_j_delta(eq, v, con, 0.0, star) == doctest::Approx(at.value).epsilon(1e-9));
  CHECK(rate_cal_j_delta(eq, v, con, 0.3, star) <= at.value + 1e-12);

  const auto above = constrained_equilibrium(v, eq, 1.9);
  CHECK_THROWS_AS(rate_cal_j(eq, v, ConstrainedEquilibriumResult{2.5, above.lo, above.masses, above.minimizer,
                                                                  0.0, 0.0, 0, true},
                             nu_limit(eq)),
                  InvalidArgument);
}

TEST_CASE("negative log energy helper") {
  const auto [s, m] = neg_log_energy(GridMeasure(0.0, 1.0, {1.0, 1.0, 1.0}));
  CHECK(s == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_FALSE(m.has_value());
}
