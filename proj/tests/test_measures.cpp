#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "betalab/error.hpp"
#include "betalab/measures.hpp"
#include "betalab/numeric.hpp"
#include "oracles.hpp"

using namespace betalab;

namespace {

AtomicMeasure random_atomic(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> pos(-3.0, 3.0), wt(0.1, 1.0);
  std::vector<double> x(n), w(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = pos(gen);
    w[i] = wt(gen);
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return AtomicMeasure(x, w);
}

GridMeasure semicircle(std::size_t n = 4096) {
  return GridMeasure::from_density(-2.0, 2.0, n, oracle::semicircle_density);
}

}  // namespace

TEST_CASE("atomic measure canonical form") {
  AtomicMeasure m({3.0, 1.0, 3.0, 2.0}, {0.25, 0.25, 0.25, 0.25});
  REQUIRE(m.size() == 3);
  CHECK(m.atoms()[0] == 1.0);
  CHECK(m.atoms()[2] == 3.0);
  CHECK(m.weights()[2] == doctest::Approx(0.5));
  CHECK_THROWS_AS(AtomicMeasure({0.0, 1.0}, {0.5, 0.6}), InvalidArgument);

  auto e = AtomicMeasure::equal_weight({2.0, 0.0, 1.0});
  CHECK(e.equal_weights());
  CHECK(e.weights()[1] == 1.0 / 3.0);
  auto merged = AtomicMeasure::equal_weight({1.0, 1.0});
  CHECK_FALSE(merged.equal_weights());
  CHECK(merged.size() == 1);

  AtomicMeasure z({0.0, 1.0, 2.0}, {0.5, 0.0, 0.5});
  CHECK(z.size() == 2);
}

TEST_CASE("grid measure normalizes and inverts its cdf") {
  GridMeasure g(0.0, 2.0, {2.0, 2.0, 2.0, 2.0, 2.0});
  CHECK(g.density(1.0) == doctest::Approx(0.5));
  CHECK(g.cdf(0.5) == doctest::Approx(0.25));
  auto s = semicircle();
  for (double u : {0.01, 0.2, 0.5, 0.77, 0.999}) CHECK(s.cdf(s.quantile(u)) == doctest::Approx(u).epsilon(1e-12));
  CHECK(s.quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.cdf(1.0) == doctest::Approx(oracle::semicircle_cdf(1.0)).epsilon(1e-5));
  CHECK(s.node(s.intervals()) == 2.0);
  CHECK_THROWS_AS(GridMeasure(0.0, 1.0, {1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(GridMeasure(1.0, 0.0, {1.0, 1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(GridMeasure(0.0, 1.0, {1.0, -1.0, 1.0}), InvalidArgument);
}

TEST_CASE("cell masses round trip") {
  const std::vector<double> m{0.1, 0.2, 0.3, 0.4};
  auto g = GridMeasure::from_cell_masses(0.0, 1.0, m);
  double total = 0.0;
  for (double x : g.cell_masses()) total += x;
  CHECK(total == doctest::Approx(1.0));
  CHECK(mean(Measure(g)) == doctest::Approx(0.6).epsilon(0.05));
}

TEST_CASE("moments") {
  AtomicMeasure a({0.0, 1.0, 3.0}, {0.5, 0.25, 0.25});
  CHECK(mean(Measure(a)) == doctest::Approx(1.0));
  CHECK(variance(Measure(a)) == doctest::Approx(0.5 * 1 + 0.25 * 0 + 0.25 * 4));
  CHECK(moment(Measure(semicircle()), 2) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(moment(Measure(semicircle()), 4) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(support_min(Measure(a)) == 0.0);
  CHECK(support_max(Measure(a)) == 3.0);
}

TEST_CASE("reflect-and-shift is an involution and preserves the log energy") {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 20; ++t) {
    auto m = random_atomic(gen, 8);
    const double c = std::uniform_real_distribution<double>(-5, 5)(gen);
    auto back = reflect_shift(reflect_shift(m, c), c);
    REQUIRE(back.size() == m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(back.atoms()[i] == doctest::Approx(m.atoms()[i]).epsilon(1e-14));
      CHECK(back.weights()[i] == doctest::Approx(m.weights()[i]).epsilon(1e-14));
    }
    CHECK(log_energy_reg(reflect_shift(m, c), 5.0) == doctest::Approx(log_energy_reg(m, 5.0)).epsilon(1e-12));
  }
  GridMeasure g(0.0, 1.0, {0.0, 1.0, 3.0, 0.5, 0.0});
  auto r = reflect_shift(g, 4.0);
  CHECK(r.lo() == 3.0);
  CHECK(r.hi() == 4.0);
  CHECK(r.density(3.25) == doctest::Approx(g.density(0.75)));
  auto rr = reflect_shift(r, 4.0);
  for (std::size_t i = 0; i <= g.intervals(); ++i) CHECK(rr.values()[i] == doctest::Approx(g.values()[i]));
  CHECK(log_energy_grid(r) == doctest::Approx(log_energy_grid(g)).epsilon(1e-12));
  CHECK(mean(Measure(translate(g, 2.0))) == doctest::Approx(mean(Measure(g)) + 2.0));
}

TEST_CASE("wasserstein: explicit values") {
  const WassersteinOrder p1(1.0), p2(2.0);
  CHECK(wasserstein(AtomicMeasure::dirac(0.0), AtomicMeasure::dirac(3.0), p1) == doctest::Approx(3.0));
  CHECK(wasserstein(AtomicMeasure::dirac(0.0), AtomicMeasure::dirac(3.0), p2) == doctest::Approx(3.0));
  AtomicMeasure a({0.0, 1.0}, {0.5, 0.5});
  CHECK(wasserstein(a, AtomicMeasure::dirac(0.0), p1) == doctest::Approx(0.5));
  CHECK(wasserstein(a, AtomicMeasure::dirac(0.0), p2) == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(WassersteinOrder(0.5), InvalidArgument);

  // Uniform[0,1] against delta_0: int_0^1 x dx.
  GridMeasure u(0.0, 1.0, {1.0, 1.0, 1.0});
  CHECK(wasserstein(u, AtomicMeasure::dirac(0.0), p1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(wasserstein(u, AtomicMeasure::dirac(0.0), p2) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("wasserstein: metric axioms and order monotonicity") {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 50; ++t) {
    const Measure x = random_atomic(gen, 6), y = random_atomic(gen, 9), z = random_atomic(gen, 4);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      const WassersteinOrder o(p);
      const double xy = wasserstein(x, y, o);
      CHECK(xy >= 0.0);
      CHECK(wasserstein(x, x, o) == doctest::Approx(0.0));
      CHECK(xy == doctest::Approx(wasserstein(y, x, o)).epsilon(1e-12));
      CHECK(xy <= wasserstein(x, z, o) + wasserstein(z, y, o) + 1e-12);
    }
    CHECK(wasserstein(x, y, WassersteinOrder(1)) <= wasserstein(x, y, WassersteinOrder(2)) + 1e-12);
    CHECK(wasserstein(x, y, WassersteinOrder(2)) <= wasserstein(x, y, WassersteinOrder(3)) + 1e-12);
  }
}

TEST_CASE("wasserstein of atoms against a density matches the cdf-integral oracle") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd(0.0, 0.8);
  std::vector<double> xs(300);
  for (auto& x : xs) x = nd(gen);
  const auto s = semicircle();
  const double w = wasserstein(AtomicMeasure::equal_weight(xs), s, WassersteinOrder(1));
  const double ref = oracle::w1_from_cdfs(oracle::empirical_cdf(xs), oracle::semicircle_cdf, -6.0, 6.0, 20000);
  CHECK(w == doctest::Approx(ref).epsilon(1e-4));
}

TEST_CASE("quantile discretization converges") {
  const auto s = semicircle();
  double prev = 1e9;
  for (int n : {10, 40, 160, 640}) {
    const auto d = quantile_discretize(s, n);
    CHECK(d.size() == static_cast<std::size_t>(n - 1));
    const double w = wasserstein(d, s, WassersteinOrder(1));
    CHECK(w < prev);
    CHECK(w <= 5.0 / n);
    prev = w;
  }
  CHECK_THROWS_AS(quantile_discretize(s, 1), InvalidArgument);
}

TEST_CASE("truncation and mixtures") {
  AtomicMeasure a({-3.0, 0.0, 1.0}, {0.5, 0.25, 0.25});
  const auto t = std::get<AtomicMeasure>(truncate_normalize(a, 2.0));
  CHECK(t.size() == 2);
  CHECK(t.weights()[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(truncate_normalize(AtomicMeasure::dirac(5.0), 1.0), InvalidArgument);

  const auto m = mixture(AtomicMeasure::dirac(0.0), AtomicMeasure::dirac(1.0), 0.25);
  CHECK(m.weights()[1] == doctest::Approx(0.25));
  GridMeasure u1(0.0, 1.0, {1.0, 1.0, 1.0}), u2(2.0, 3.0, {1.0, 1.0, 1.0});
  const auto gm = mixture(u1, u2, 0.5);
  CHECK(mean(Measure(gm)) == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("regularized log energy of atoms") {
  AtomicMeasure a({0.0, 1.0}, {0.5, 0.5});
  CHECK(log_energy_reg(a, 3.0) == doctest::Approx(1.5));  // diagonal M/2, off-diagonal -ln 1 = 0
  AtomicMeasure b({0.0, 1e-9}, {0.5, 0.5});
  CHECK(log_energy_reg(b, 4.0) == doctest::Approx(4.0));  // cap reached everywhere
  AtomicMeasure c({0.0, 2.0}, {0.5, 0.5});
  CHECK(log_energy_reg(c, 10.0) == doctest::Approx(5.0 - 0.5 * std::log(2.0)));
}

TEST_CASE("cell kernel matches direct integration") {
  const auto k = log_cell_kernel(40);
  for (std::size_t m : {0u, 1u, 2u, 7u, 8u, 9u, 39u}) {
    const double md = static_cast<double>(m);
    // int_0^1 int_0^1 ln|m + s - t| = int_{-1}^{1} (1 - |u|) ln|m + u| du
    const double ref = oracle::integrate_endpoint_singular([&](double u) { return (1.0 + u) * std::log(std::abs(md + u)); }, -1.0, 0.0) +
                       oracle::integrate_endpoint_singular([&](double u) { return (1.0 - u) * std::log(std::abs(md + u)); }, 0.0, 1.0);
    CHECK(std::abs(k[m] - ref) < 1e-11);
  }
  std::vector<double> w{0.1, 0.4, 0.2, 0.3};
  double naive = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) naive += w[i] * w[j] * k[std::abs(i - j)];
  CHECK(toeplitz_quadratic(k, w) == doctest::Approx(naive).epsilon(1e-14));
}

TEST_CASE("grid log energy against closed forms and the direct oracle") {
  CHECK(log_energy_grid(GridMeasure(0.0, 1.0, {1.0, 1.0, 1.0})) == doctest::Approx(-1.5).epsilon(1e-13));
  const double sc = log_energy_grid(semicircle());
  CHECK(sc == doctest::Approx(-0.25).epsilon(1e-4));
  const double direct = oracle::log_energy(oracle::semicircle_density, -2.0, 2.0);
  CHECK(direct == doctest::Approx(-0.25).epsilon(1e-8));
}

TEST_CASE("log potential of a grid density") {
  const auto s = semicircle();
  for (double x : {-2.5, -1.0, 0.0, 0.3, 2.0, 3.0}) {
    const double ref = oracle::log_potential(oracle::semicircle_density, -2.0, 2.0, x);
    CHECK(log_potential(s, x) == doctest::Approx(ref).epsilon(1e-5));
  }
  // Inside the support the semicircle potential is x^2/4 - 1/2.
  CHECK(log_potential(s, 1.0) == doctest::Approx(-0.25).epsilon(1e-5));
}

TEST_CASE("numeric helpers") {
  CHECK(integrate_gl([](double x) { return x * x; }, 0.0, 3.0) == doctest::Approx(9.0));
  CHECK(chebyshev_first_mean([](double u) { return u * u; }, 8) == doctest::Approx(0.5));
  CHECK(chebyshev_second_mean([](double u) { return u * u; }, 8) == doctest::Approx(0.25));
  const auto m = golden_section([](double x) { return (x - 1.3) * (x - 1.3); }, 0.0, 3.0, 1e-9);
  CHECK(m.x == doctest::Approx(1.3).epsilon(1e-7));
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }));
  std::vector<double> xs{1e16, 1.0, -1e16};
  CHECK(compensated_sum(xs) == 1.0);
}
