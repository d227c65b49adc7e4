#include "betalab/equilibrium.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "betalab/error.hpp"
#include "betalab/numeric.hpp"

namespace betalab {

namespace {

struct EndpointSystem {
  const Potential& v;
  std::vector<double> u;  // Chebyshev nodes on [-1, 1]

  // F1 = (1/pi) int V'(t) / sqrt((t-a)(b-t)) dt,
  // F2 = (1/2pi) int t V'(t) / sqrt((t-a)(b-t)) dt - 1, in centre/radius form.
  std::array<double, 2> residual(double c, double r) const {
    CompensatedSum f1, f2;
    for (double uk : u) {
      const double t = c + r * uk;
      const double d1 = v.first()(t);
      f1 += d1;
      f2 += t * d1;
    }
    const double n = static_cast<double>(u.size());
    return {f1.value() / n, 0.5 * f2.value() / n - 1.0};
  }

  std::array<double, 4> jacobian(double c, double r) const {
    CompensatedSum j11, j12, j21, j22;
    for (double uk : u) {
      const double t = c + r * uk;
      const double d1 = v.first()(t), d2 = v.second()(t);
      j11 += d2;
      j12 += uk * d2;
      j21 += d1 + t * d2;
      j22 += uk * (d1 + t * d2);
    }
    const double n = static_cast<double>(u.size());
    return {j11.value() / n, j12.value() / n, 0.5 * j21.value() / n, 0.5 * j22.value() / n};
  }
};

double norm2(const std::array<double, 2>& f) { return std::hypot(f[0], f[1]); }

std::vector<double> chebyshev_nodes(std::size_t n) {
  std::vector<double> u(n);
  for (std::size_t k = 0; k < n; ++k)
    u[k] = std::cos(std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n));
  return u;
}

}  // namespace

Support equilibrium_support(const Potential& v, const EquilibriumOptions& opts) {
  const std::size_t nc = opts.chebyshev_nodes;
  EndpointSystem sys{v, chebyshev_nodes(nc)};

  // Start at the minimizer of V with the semicircle radius of its curvature.
  const auto crit = real_roots(v.first());
  double c = crit.empty() ? 0.0 : crit[crit.size() / 2];
  const double curv = v.second()(c);
  double r = curv > 0.0 ? 2.0 / std::sqrt(curv) : 1.0;

  auto f = sys.residual(c, r);
  int it = 0;
  for (; it < opts.max_newton && norm2(f) > opts.newton_tol; ++it) {
    const auto j = sys.jacobian(c, r);
    const double det = j[0] * j[3] - j[1] * j[2];
    if (det == 0.0 || !std::isfinite(det))
      throw ConvergenceError("solve_equilibrium: singular Jacobian", norm2(f));
    const double dc = (j[3] * f[0] - j[1] * f[1]) / det;
    const double dr = (-j[2] * f[0] + j[0] * f[1]) / det;
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, lambda *= 0.5) {
      const double cn = c - lambda * dc, rn = r - lambda * dr;
      if (!(rn > 0.0)) continue;
      const auto fn = sys.residual(cn, rn);
      if (norm2(fn) < norm2(f) || norm2(fn) <= opts.newton_tol) {
        c = cn;
        r = rn;
        f = fn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(norm2(f) <= opts.newton_tol)) {
    std::ostringstream os;
    os << "solve_equilibrium: endpoint Newton stalled at a=" << c - r << " b=" << c + r;
    throw ConvergenceError(os.str(), norm2(f));
  }
  return {c - r, c + r, it, norm2(f)};
}

EquilibriumResult solve_equilibrium(const Potential& v, const EquilibriumOptions& opts) {
  const Support sup = equilibrium_support(v, opts);
  const double c = 0.5 * (sup.a + sup.b), r = 0.5 * (sup.b - sup.a);
  const auto u = chebyshev_nodes(opts.chebyshev_nodes);

  // Arcsine moments M_k = (1/pi) int t^k / sqrt((t-a)(b-t)) dt; then
  // h(x) = sum_j d_j sum_{i<j} x^i M_{j-1-i} for V' = sum_j d_j x^j.
  const auto& d = v.first().coeffs();
  std::vector<double> moments(d.size() + 1, 0.0);
  for (std::size_t k = 0; k < moments.size(); ++k) {
    CompensatedSum s;
    for (double uk : u) s += std::pow(c + r * uk, static_cast<double>(k));
    moments[k] = s.value() / static_cast<double>(u.size());
  }
  std::vector<double> hc(std::max<std::size_t>(d.size(), 2) - 1, 0.0);
  for (std::size_t jdeg = 1; jdeg < d.size(); ++jdeg)
    for (std::size_t i = 0; i < jdeg; ++i) hc[i] += d[jdeg] * moments[jdeg - 1 - i];

  auto res = equilibrium_from_parts(v, sup.a, sup.b, Polynomial(hc), opts);
  res.newton_iterations = sup.iterations;
  res.endpoint_residual = sup.residual;
  return res;
}

EquilibriumResult equilibrium_from_parts(const Potential& v, double a, double b, Polynomial h,
                                         const EquilibriumOptions& opts) {
  if (!(a < b)) throw InvalidArgument("equilibrium: need a < b");
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  EquilibriumResult res{a, b, GridMeasure(0.0, 1.0, {1.0, 1.0, 1.0}), 0.0, 0.0, 0.0, std::move(h), 0.0, 0.0, 0, 0.0, {}, {}};

  // (2/pi) int g(u) sqrt(1-u^2) du weights, folded with h and the Jacobian.
  const std::size_t na = opts.analytic_nodes;
  res.quad_nodes.resize(na);
  res.quad_weights.resize(na);
  CompensatedSum wsum;
  for (std::size_t k = 1; k <= na; ++k) {
    const double th = std::numbers::pi * static_cast<double>(k) / static_cast<double>(na + 1);
    const double s = std::sin(th);
    const double y = c + r * std::cos(th);
    const double w = 2.0 * s * s / static_cast<double>(na + 1) * res.h(y) * r * r / 4.0;
    res.quad_nodes[k - 1] = y;
    res.quad_weights[k - 1] = w;
    wsum += w;
  }
  for (double& w : res.quad_weights) w /= wsum.value();

  res.density = GridMeasure::from_density(a, b, opts.grid, [&](double x) { return res.density_at(x); });

  res.potential_energy = res.expect([&](double x) { return v(x); });
  const double el_constant = 2.0 * res.log_potential(b) - v(b);
  res.sigma = 0.5 * (res.potential_energy + el_constant);
  res.c_v = -res.sigma + res.potential_energy;
  res.sigma_grid = log_energy_grid(res.density);
  res.potential_energy_grid = res.density.expect([&](double x) { return v(x); });
  return res;
}

double EquilibriumResult::density_at(double x) const {
  if (x <= a || x >= b) return 0.0;
  return std::sqrt((x - a) * (b - x)) * std::max(0.0, h(x)) / (2.0 * std::numbers::pi);
}

double EquilibriumResult::expect(const std::function<double(double)>& f) const {
  CompensatedSum s;
  for (std::size_t k = 0; k < quad_nodes.size(); ++k) s += quad_weights[k] * f(quad_nodes[k]);
  return s.value();
}

double EquilibriumResult::log_potential(double x) const {
  return expect([x](double y) { return std::log(std::abs(x - y)); });
}

GridMeasure nu_limit(const EquilibriumResult& eq) { return reflect_shift(eq.density, eq.b); }

double effective_potential_tail(const EquilibriumResult& eq, const Potential& v, double x) {
  if (!(x >= eq.b))
    throw InvalidArgument("effective_potential_tail: x must be >= b_V (the rate is +inf below)");
  if (x == eq.b) return 0.0;
  const double at_b = v(eq.b) - 2.0 * eq.log_potential(eq.b);
  return v(x) - 2.0 * eq.log_potential(x) - at_b;
}

// ----------------------------------------------------------- constrained problem

ConstrainedObjective::ConstrainedObjective(const Potential& v, double lo, double hi,
                                           std::size_t cells, double c_v)
    : lo_(lo), hi_(hi), step_((hi - lo) / static_cast<double>(cells)) {
  if (!(lo < hi) || cells < 2) throw InvalidArgument("ConstrainedObjective: bad grid");
  kernel_ = log_cell_kernel(cells);
  linear_.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double x0 = lo + step_ * static_cast<double>(i);
    linear_[i] = v.cell_average(x0, x0 + step_);
  }
  constant_ = -std::log(step_) - c_v;
}

double ConstrainedObjective::value(std::span<const double> m) const {
  CompensatedSum lin;
  for (std::size_t i = 0; i < m.size(); ++i) lin += m[i] * linear_[i];
  return constant_ - toeplitz_quadratic(kernel_, m) + lin.value();
}

std::vector<double> ConstrainedObjective::gradient(std::span<const double> m) const {
  const std::size_t n = m.size();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    double km = 0.0;
    for (std::size_t j = 0; j < n; ++j) km += kernel_[i > j ? i - j : j - i] * m[j];
    g[i] = -2.0 * km + linear_[i];
  }
  return g;
}

ConstrainedEquilibriumResult constrained_equilibrium(const Potential& v, const EquilibriumResult& eq,
                                                     double x, const ConstrainedOptions& opts) {
  const double lo = eq.a - opts.left_factor * (eq.b - eq.a);
  if (!(x > lo)) throw InvalidArgument("constrained_equilibrium: cutoff lies left of the solver window");
  const std::size_t n = opts.cells;
  const ConstrainedObjective obj(v, lo, x, n, eq.c_v);
  const double h = obj.step();
  const auto kern = obj.kernel();
  const auto lin = obj.linear();

  // Warm start: mu_V restricted to the window, else a block just left of x.
  std::vector<double> m(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = eq.density_at(lo + h * (static_cast<double>(i) + 0.5)) * h;
    total += m[i];
  }
  if (total < 1e-3) {
    std::fill(m.begin(), m.end(), 0.0);
    const double start = std::max(lo, x - (eq.b - eq.a));
    total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (lo + h * static_cast<double>(i) >= start) m[i] = 1.0, total += 1.0;
  }
  for (double& mi : m) mi /= total;

  auto full_km = [&](std::vector<double>& km) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (m[j] != 0.0) s += kern[i > j ? i - j : j - i] * m[j];
      km[i] = s;
    }
  };
  std::vector<double> km(n);
  full_km(km);

  double gap = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    if (iter % 2000 == 1999) full_km(km);
    std::size_t j = 0, k = n;
    double gmin = std::numeric_limits<double>::infinity(), gmax = -gmin;
    CompensatedSum mg;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = -2.0 * km[i] + lin[i];
      if (g < gmin) gmin = g, j = i;
      if (m[i] > 0.0) {
        mg += m[i] * g;
        if (g > gmax) gmax = g, k = i;
      }
    }
    gap = mg.value() - gmin;
    if (gap <= opts.gap_tol || k == n || j == k) break;
    // Move mass from the worst support cell k to the best cell j.
    const double slope = gmin - gmax;
    const std::size_t dist = j > k ? j - k : k - j;
    const double curvature = 2.0 * (kern[dist] - kern[0]);
    const double step = std::min(m[k], -slope / (2.0 * curvature));
    if (!(step > 0.0)) break;
    m[j] += step;
    m[k] -= step;
    if (m[k] < 1e-300) m[k] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t dj = i > j ? i - j : j - i;
      const std::size_t dk = i > k ? i - k : k - i;
      km[i] += step * (kern[dj] - kern[dk]);
    }
  }

  ConstrainedEquilibriumResult res{x, lo, m, GridMeasure::from_cell_masses(lo, x, m),
                                   obj.value(m), gap, iter, gap <= opts.gap_tol};
  return res;
}

}  // namespace betalab
