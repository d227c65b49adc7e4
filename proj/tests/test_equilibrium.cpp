#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "betalab/equilibrium.hpp"
#include "betalab/error.hpp"
#include "oracles.hpp"

using namespace betalab;

namespace {

double oracle_c_v(const std::function<double(double)>& rho, const std::function<double(double)>& v, double a,
                  double b) {
  const double sigma = oracle::log_energy(rho, a, b);
  const double pot = oracle::integrate_endpoint_singular([&](double x) { return v(x) * rho(x); }, a, b);
  return -sigma + pot;
}

double el_spread(const EquilibriumResult& eq, const Potential& v, int points = 400) {
  double lo = 1e300, hi = -1e300;
  for (int i = 1; i < points; ++i) {
    const double x = eq.a + (eq.b - eq.a) * i / points;
    const double c = 2.0 * log_potential(eq.density, x) - v(x);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return hi - lo;
}

}  // namespace

TEST_CASE("gaussian equilibrium: endpoints, energy and constant") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto eq = solve_equilibrium(Potential::gaussian());
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(std::abs(eq.a + 2.0) <= 1e-6);
  CHECK(std::abs(eq.b - 2.0) <= 1e-6);
  CHECK(std::abs(eq.c_v - 0.75) <= 1e-4);
  CHECK(std::abs(eq.sigma + 0.25) <= 1e-4);
  CHECK(std::abs(eq.sigma_grid + 0.25) <= 1e-4);
  CHECK(eq.potential_energy == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(seconds < 1.0);
  for (double x : {-1.9, -1.0, 0.0, 0.5, 1.99}) CHECK(eq.density_at(x) == doctest::Approx(oracle::semicircle_density(x)).epsilon(1e-12));
  CHECK(eq.density_at(2.5) == 0.0);
  CHECK(eq.expect([](double x) { return x * x * x * x; }) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("scaled and shifted quadratics") {
  // V = x^2: semicircle of radius sqrt 2, c_V = 3/4 + ln(2)/2.
  const auto eq = solve_equilibrium(Potential::parse("0,0,1"));
  CHECK(eq.b == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK(eq.c_v == doctest::Approx(0.75 + 0.5 * std::log(2.0)).epsilon(1e-6));
  // V = x^2/2 + x = (x+1)^2/2 - 1/2: support [-3, 1], c_V = 1/4.
  const auto sh = solve_equilibrium(Potential::parse("0,1,0.5"));
  CHECK(sh.a == doctest::Approx(-3.0).epsilon(1e-10));
  CHECK(sh.b == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sh.c_v == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("quartic equilibria match the closed-form density") {
  for (auto [q, g] : {std::pair{0.0, 1.0}, std::pair{0.5, 1.0}, std::pair{0.25, 0.1}}) {
    const oracle::EvenQuartic ref(q, g);
    const Potential v({0.0, 0.0, q, 0.0, g});
    const auto eq = solve_equilibrium(v);
    CHECK(eq.b == doctest::Approx(ref.edge()).epsilon(1e-10));
    CHECK(eq.a == doctest::Approx(-ref.edge()).epsilon(1e-10));
    for (double u : {-0.95, -0.5, 0.0, 0.3, 0.9})
      CHECK(eq.density_at(u * ref.edge()) == doctest::Approx(ref.density(u * ref.edge())).epsilon(1e-10));
    const double cv = oracle_c_v([&](double x) { return ref.density(x); }, [&](double x) { return v(x); },
                                 -ref.edge(), ref.edge());
    CHECK(eq.c_v == doctest::Approx(cv).epsilon(1e-7));
    CHECK(el_spread(eq, v) <= 1e-4);
  }
}

TEST_CASE("asymmetric sextic: mass, moments and flatness") {
  const Potential v = Potential::parse("0,0.3,0.2,0.1,0.5,0,0.05");
  const auto eq = solve_equilibrium(v);
  CHECK(eq.a < eq.b);
  CHECK(eq.expect([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));
  // Balance of forces: int V' dmu = 0.
  CHECK(std::abs(eq.expect([&](double x) { return v.deriv(x, 1); })) < 1e-10);
  CHECK(el_spread(eq, v) <= 1e-4);
  for (int i = 1; i < 50; ++i) CHECK(eq.density_at(eq.a + (eq.b - eq.a) * i / 50.0) > 0.0);
  // Grid and analytic routes to Sigma agree.
  CHECK(eq.sigma_grid == doctest::Approx(eq.sigma).epsilon(1e-4));
}

TEST_CASE("reflected limit and right tail") {
  const auto eq = solve_equilibrium(Potential::gaussian());
  const auto nu = nu_limit(eq);
  CHECK(nu.lo() == doctest::Approx(0.0));
  CHECK(nu.hi() == doctest::Approx(4.0));
  CHECK(mean(Measure(nu)) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(effective_potential_tail(eq, Potential::gaussian(), 2.0) == 0.0);
  for (double x : {2.01, 2.5, 3.0, 5.0})
    CHECK(effective_potential_tail(eq, Potential::gaussian(), x) == doctest::Approx(oracle::gaussian_right_rate(x)).epsilon(1e-8));
  CHECK_THROWS_AS(effective_potential_tail(eq, Potential::gaussian(), 1.5), InvalidArgument);
  // Quartic tail is increasing.
  const Potential q = Potential::parse("0,0,0,0,1");
  const auto eqq = solve_equilibrium(q);
  double prev = 0.0;
  for (double d : {0.1, 0.3, 0.6}) {
    const double j = effective_potential_tail(eqq, q, eqq.b + d);
    CHECK(j > prev);
    prev = j;
  }
}

TEST_CASE("constrained objective: gradient agrees with finite differences") {
  const auto eq = solve_equilibrium(Potential::gaussian());
  ConstrainedObjective obj(Potential::gaussian(), -4.0, 1.0, 60, eq.c_v);
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> m(obj.cells());
  double total = 0.0;
  for (auto& x : m) total += (x = u(gen));
  for (auto& x : m) x /= total;
  const auto g = obj.gradient(m);
  for (std::size_t i : {0u, 7u, 30u, 59u}) {
    const double h = 1e-6;
    auto mp = m, mm = m;
    mp[i] += h;
    mm[i] -= h;
    const double fd = (obj.value(mp) - obj.value(mm)) / (2.0 * h);
    CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
  }
}

TEST_CASE("constrained objective value equals the energy of the cell density") {
  const auto eq = solve_equilibrium(Potential::gaussian());
  ConstrainedObjective obj(Potential::gaussian(), -3.0, 1.0, 40, eq.c_v);
  std::vector<double> m(40, 1.0 / 40.0);
  // Uniform law on [-3, 1]: Sigma = ln 4 - 3/2, int V = (1 + 27)/(6 * 4) ... computed directly.
  const double sigma = std::log(4.0) - 1.5;
  const double pot = (1.0 + 27.0) / 6.0 / 4.0;
  CHECK(obj.value(m) == doctest::Approx(-sigma + pot - eq.c_v).epsilon(1e-12));
}

TEST_CASE("Frank–Wolfe matches an accelerated projected-gradient solve") {
  const Potential v = Potential::gaussian();
  const auto eq = solve_equilibrium(v);
  ConstrainedOptions opts;
  opts.cells = 160;
  for (double c : {0.5, 1.5}) {
    const auto fw = constrained_equilibrium(v, eq, c, opts);
    REQUIRE(fw.converged);
    const auto ref = oracle::constrained_fista([&](double x) { return v(x); }, eq.c_v, fw.lo, c, 160, 4000);
    CHECK(fw.value == doctest::Approx(ref.value).epsilon(1e-6));
  }
}

TEST_CASE("left rate: closed form, monotonicity and zero at the edge") {
  const Potential v = Potential::gaussian();
  const auto eq = solve_equilibrium(v);
  double prev = 1e9;
  for (double c : {1.0, 1.5, 1.9, 2.0}) {
    const auto res = constrained_equilibrium(v, eq, c);
    REQUIRE(res.converged);
    CHECK(res.value == doctest::Approx(oracle::gaussian_left_rate(c)).epsilon(5e-3));
    CHECK(res.value <= prev + 1e-12);
    prev = res.value;
  }
  CHECK(prev <= 1e-4);
  // The minimizer is a probability density supported left of the cutoff.
  const auto res = constrained_equilibrium(v, eq, 1.0);
  CHECK(res.minimizer.hi() == doctest::Approx(1.0));
  CHECK(res.minimizer.expect([](double) { return 1.0; }) == doctest::Approx(1.0));
}

TEST_CASE("support solver alone") {
  const auto s = equilibrium_support(Potential::parse("0,0,0,0,1"));
  CHECK(s.b == doctest::Approx(2.0 * std::pow(12.0, -0.25)).epsilon(1e-12));
  CHECK(s.residual < 1e-10);
}
