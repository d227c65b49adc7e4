#pragma once

// Reference computations used only by the tests. Each one takes a different
// route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline std::vector<double> dense_tridiag_eigenvalues(const std::vector<double>& d, const std::vector<double>& e) {
  const auto n = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = e[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(out.begin(), out.end());
  return out;
}

// Plain composite Gauss-Legendre, built from the Golub-Welsch matrix so it
// shares nothing with the library's Newton-iteration rule.
struct Rule {
  std::vector<double> x, w;
};

inline Rule golub_welsch(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  Rule r;
  for (int i = 0; i < n; ++i) {
    r.x.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    r.w.push_back(2.0 * v * v);
  }
  return r;
}

inline double integrate(const std::function<double(double)>& f, double a, double b, int panels = 64) {
  static const Rule r = golub_welsch(20);
  double s = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += 0.5 * h * r.w[i] * f(lo + 0.5 * h * (r.x[i] + 1.0));
  }
  return s;
}

// Integral of g over [a, b] where g may carry an integrable log or square-root
// singularity at either end: substitute t = a + (m - a) s^4 near a and mirror near b.
inline double integrate_endpoint_singular(const std::function<double(double)>& g, double a, double b) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double left =
      integrate([&](double s) { return g(a + (m - a) * s * s * s * s) * 4.0 * (m - a) * s * s * s; }, 0.0, 1.0, 16);
  const double right =
      integrate([&](double s) { return g(b - (b - m) * s * s * s * s) * 4.0 * (b - m) * s * s * s; }, 0.0, 1.0, 16);
  return left + right;
}

inline double semicircle_density(double x) { return std::abs(x) < 2.0 ? std::sqrt(4.0 - x * x) / (2.0 * std::numbers::pi) : 0.0; }

inline double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + (x * std::sqrt(4.0 - x * x) / 2.0 + 2.0 * std::asin(x / 2.0)) / (2.0 * std::numbers::pi);
}

// V = q x^2 + g x^4: support [-2r, 2r] with 12 g r^4 + 2 q r^2 = 1 and
// density (2 q + 8 g r^2 + 4 g x^2) sqrt(4 r^2 - x^2) / (2 pi).
struct EvenQuartic {
  double q, g, r;
  EvenQuartic(double q_, double g_) : q(q_), g(g_) {
    // Quadratic in s = r^2.
    r = g == 0.0 ? std::sqrt(1.0 / (2.0 * q)) : std::sqrt((-2.0 * q + std::sqrt(4.0 * q * q + 48.0 * g)) / (24.0 * g));
  }
  double edge() const { return 2.0 * r; }
  double density(double x) const {
    const double e = edge();
    if (std::abs(x) >= e) return 0.0;
    return (2.0 * q + 8.0 * g * r * r + 4.0 * g * x * x) * std::sqrt(e * e - x * x) / (2.0 * std::numbers::pi);
  }
};

// Largest-eigenvalue left rate for V = x^2/2 in closed form (hard wall at x < 2).
inline double gaussian_left_rate(double x) {
  if (x >= 2.0) return 0.0;
  const double z = x / std::sqrt(2.0), s = std::sqrt(z * z + 6.0);
  const double phi = (36.0 * z * z - z * z * z * z - (15.0 * z + z * z * z) * s +
                      27.0 * (std::log(18.0) - 2.0 * std::log(z + s))) / 108.0;
  return 2.0 * phi;
}

// Right rate for V = x^2/2, x >= 2.
inline double gaussian_right_rate(double x) {
  const double s = std::sqrt(x * x - 4.0);
  return 0.5 * x * s - 2.0 * std::log(0.5 * (x + s));
}

// Log potential U(x) = int ln|x - y| rho(y) dy straight from the definition.
inline double log_potential(const std::function<double(double)>& rho, double a, double b, double x) {
  auto g = [&](double y) { return y == x ? 0.0 : std::log(std::abs(x - y)) * rho(y); };
  if (x <= a || x >= b) return integrate_endpoint_singular(g, a, b);
  return integrate_endpoint_singular(g, a, x) + integrate_endpoint_singular(g, x, b);
}

// Sigma = int U dmu, outer integral with the same singular-end substitution.
inline double log_energy(const std::function<double(double)>& rho, double a, double b) {
  return integrate_endpoint_singular([&](double x) { return rho(x) * log_potential(rho, a, b, x); }, a, b);
}

// W1 between two laws from their CDFs: int |F - G| dx.
inline double w1_from_cdfs(const std::function<double(double)>& f, const std::function<double(double)>& g, double lo,
                           double hi, int panels = 4000) {
  return integrate([&](double x) { return std::abs(f(x) - g(x)); }, lo, hi, panels);
}

inline std::function<double(double)> empirical_cdf(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return [xs](double x) {
    return static_cast<double>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) / static_cast<double>(xs.size());
  };
}

// Euclidean projection onto the probability simplex (sort-based).
inline std::vector<double> project_simplex(const std::vector<double>& v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

// Accelerated projected gradient (FISTA) on the simplex for a smooth convex objective.
inline std::vector<double> fista_simplex(const std::function<double(const std::vector<double>&)>& value,
                                         const std::function<std::vector<double>(const std::vector<double>&)>& grad,
                                         std::vector<double> x, double lipschitz, int iterations) {
  std::vector<double> y = x, prev = x;
  double t = 1.0;
  for (int k = 0; k < iterations; ++k) {
    const auto gy = grad(y);
    std::vector<double> step(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) step[i] = y[i] - gy[i] / lipschitz;
    x = project_simplex(step);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + (t - 1.0) / tn * (x[i] - prev[i]);
    // Restart when the objective goes up.
    if (value(x) > value(prev)) {
      y = x;
      t = 1.0;
    } else {
      t = tn;
    }
    prev = x;
  }
  return x;
}

// Minimum of -Sigma(mu) + int V dmu - c_V over cell-constant densities on
// [lo, hi], by FISTA with its own kernel and cell averages.
struct ConstrainedMinimum {
  double value;
  std::vector<double> masses;
};

inline ConstrainedMinimum constrained_fista(const std::function<double(double)>& v, double c_v, double lo, double hi,
                                            int cells, int iterations) {
  const double h = (hi - lo) / cells;
  std::vector<double> k(cells), vbar(cells);
  for (int m = 0; m < cells; ++m) {
    const double md = m;
    auto tri = [&](double u) { return md + u == 0.0 ? 0.0 : (1.0 - std::abs(u)) * std::log(std::abs(md + u)); };
    k[m] = integrate_endpoint_singular(tri, -1.0, 0.0) + integrate_endpoint_singular(tri, 0.0, 1.0);
    vbar[m] = integrate(v, lo + m * h, lo + (m + 1) * h, 1) / h;
  }
  Eigen::MatrixXd kk(cells, cells);
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < cells; ++j) kk(i, j) = k[std::abs(i - j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kk, Eigen::EigenvaluesOnly);
  const double lip = 2.0 * es.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::VectorXd vb = Eigen::Map<Eigen::VectorXd>(vbar.data(), cells);

  auto value = [&](const std::vector<double>& m) {
    Eigen::Map<const Eigen::VectorXd> x(m.data(), cells);
    return -(std::log(h) + x.dot(kk * x)) + x.dot(vb) - c_v;
  };
  auto grad = [&](const std::vector<double>& m) {
    Eigen::Map<const Eigen::VectorXd> x(m.data(), cells);
    Eigen::VectorXd g = -2.0 * (kk * x) + vb;
    return std::vector<double>(g.data(), g.data() + cells);
  };
  std::vector<double> start(cells, 1.0 / cells);
  auto best = fista_simplex(value, grad, start, lip, iterations);
  return {value(best), best};
}

inline double mean(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

inline double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (x.size() - 1);
}

}  // namespace oracle
