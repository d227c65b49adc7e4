#include "betalab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "betalab/error.hpp"
#include "betalab/numeric.hpp"

namespace betalab {

// ---------------------------------------------------------------- atomic

AtomicMeasure::AtomicMeasure(std::vector<double> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.size() != weights_.size())
    throw InvalidArgument("AtomicMeasure: atoms and weights differ in length");
  canonicalize(false);
}

AtomicMeasure AtomicMeasure::equal_weight(std::vector<double> atoms) {
  AtomicMeasure mu;
  const double w = atoms.empty() ? 0.0 : 1.0 / static_cast<double>(atoms.size());
  mu.weights_.assign(atoms.size(), w);
  mu.atoms_ = std::move(atoms);
  mu.canonicalize(true);
  return mu;
}

AtomicMeasure AtomicMeasure::dirac(double x) { return equal_weight({x}); }

void AtomicMeasure::canonicalize(bool equal) {
  if (atoms_.empty()) throw InvalidArgument("AtomicMeasure: no atoms");
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!std::isfinite(atoms_[i])) throw InvalidArgument("AtomicMeasure: non-finite atom");
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i]))
      throw InvalidArgument("AtomicMeasure: negative or non-finite weight");
  }
  const bool sorted = std::is_sorted(atoms_.begin(), atoms_.end());
  if (!sorted) {
    std::vector<std::size_t> order(atoms_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return atoms_[a] < atoms_[b]; });
    std::vector<double> a(order.size()), w(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      a[i] = atoms_[order[i]];
      w[i] = weights_[order[i]];
    }
    atoms_ = std::move(a);
    weights_ = std::move(w);
  }
  std::vector<double> a, w;
  a.reserve(atoms_.size());
  w.reserve(atoms_.size());
  bool merged = false;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (weights_[i] == 0.0) {
      merged = true;
      continue;
    }
    if (!a.empty() && a.back() == atoms_[i]) {
      w.back() += weights_[i];
      merged = true;
    } else {
      a.push_back(atoms_[i]);
      w.push_back(weights_[i]);
    }
  }
  if (a.empty()) throw InvalidArgument("AtomicMeasure: total weight is zero");
  const double total = compensated_sum(w);
  if (!equal && std::abs(total - 1.0) > 1e-9)
    throw InvalidArgument("AtomicMeasure: weights must sum to 1");
  // Already-normalized input (e.g. read back from disk) is kept bit-exact.
  if (std::abs(total - 1.0) > 1e-14)
    for (double& x : w) x /= total;
  atoms_ = std::move(a);
  weights_ = std::move(w);
  equal_ = equal && !merged;
  if (equal_) std::fill(weights_.begin(), weights_.end(), 1.0 / static_cast<double>(atoms_.size()));
}

// ---------------------------------------------------------------- grid

GridMeasure::GridMeasure(double lo, double hi, std::vector<double> values)
    : lo_(lo), hi_(hi), values_(std::move(values)) {
  if (!(lo_ < hi_) || !std::isfinite(lo_) || !std::isfinite(hi_))
    throw InvalidArgument("GridMeasure: need finite lo < hi");
  if (values_.size() < 3) throw InvalidArgument("GridMeasure: need at least 2 intervals");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("GridMeasure: densities must be finite and nonnegative");
  const std::size_t n = values_.size() - 1;
  step_ = (hi_ - lo_) / static_cast<double>(n);
  CompensatedSum total;
  for (std::size_t i = 0; i < n; ++i) total += 0.5 * step_ * (values_[i] + values_[i + 1]);
  const double mass = total.value();
  if (!(mass > 0.0)) throw InvalidArgument("GridMeasure: zero total mass");
  if (std::abs(mass - 1.0) > 1e-14)
    for (double& v : values_) v /= mass;
  cum_.resize(n + 1);
  cum_[0] = 0.0;
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    acc += 0.5 * step_ * (values_[i] + values_[i + 1]);
    cum_[i + 1] = acc.value();
  }
  cum_[n] = 1.0;
}

GridMeasure GridMeasure::from_density(double lo, double hi, std::size_t intervals,
                                      const std::function<double(double)>& density) {
  if (intervals < 2) throw InvalidArgument("GridMeasure: need at least 2 intervals");
  std::vector<double> v(intervals + 1);
  const double h = (hi - lo) / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double x = i == intervals ? hi : lo + h * static_cast<double>(i);
    v[i] = std::max(0.0, density(x));
  }
  return GridMeasure(lo, hi, std::move(v));
}

GridMeasure GridMeasure::from_cell_masses(double lo, double hi, std::span<const double> masses) {
  const std::size_t n = masses.size();
  if (n < 2) throw InvalidArgument("GridMeasure: need at least 2 cells");
  const double h = (hi - lo) / static_cast<double>(n);
  std::vector<double> v(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    const double left = i > 0 ? masses[i - 1] / h : 0.0;
    const double right = i < n ? masses[i] / h : 0.0;
    v[i] = std::max(0.0, 0.5 * (left + right));
  }
  return GridMeasure(lo, hi, std::move(v));
}

double GridMeasure::density(double x) const noexcept {
  if (!(x >= lo_ && x <= hi_)) return 0.0;
  const double t = (x - lo_) / step_;
  const std::size_t n = intervals();
  std::size_t i = static_cast<std::size_t>(t);
  if (i >= n) return values_[n];
  const double f = t - static_cast<double>(i);
  return values_[i] + f * (values_[i + 1] - values_[i]);
}

std::vector<double> GridMeasure::cell_masses() const {
  const std::size_t n = intervals();
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = cum_[i + 1] - cum_[i];
  return m;
}

double GridMeasure::cdf(double x) const noexcept {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  const std::size_t n = intervals();
  std::size_t i = std::min(n - 1, static_cast<std::size_t>((x - lo_) / step_));
  const double t = x - node(i);
  const double slope = (values_[i + 1] - values_[i]) / step_;
  return std::min(1.0, cum_[i] + values_[i] * t + 0.5 * slope * t * t);
}

namespace {

// Solves F_i + rho t + slope t^2 / 2 = F_i + delta for t in [0, h].
double invert_cell(double rho, double slope, double delta, double h) {
  if (delta <= 0.0) return 0.0;
  const double disc = rho * rho + 2.0 * slope * delta;
  const double denom = rho + std::sqrt(std::max(0.0, disc));
  if (!(denom > 0.0)) return h;
  return std::clamp(2.0 * delta / denom, 0.0, h);
}

}  // namespace

double GridMeasure::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("quantile: u must lie in [0, 1]");
  // First node whose cdf reaches u; the answer lies in the preceding cell,
  // which has positive mass, so the in-cell solution is the infimum.
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
  std::size_t j = static_cast<std::size_t>(it - cum_.begin());
  if (j == 0) {
    // u == 0: infimum of the support.
    std::size_t k = 0;
    while (k + 1 < cum_.size() && cum_[k + 1] == 0.0) ++k;
    return node(k);
  }
  if (j >= cum_.size()) j = cum_.size() - 1;
  const std::size_t i = j - 1;
  const double slope = (values_[i + 1] - values_[i]) / step_;
  return node(i) + invert_cell(values_[i], slope, u - cum_[i], step_);
}

double GridMeasure::expect(const std::function<double(double)>& f) const {
  // Three-point Gauss per cell against the linear density: exact when f is
  // a polynomial of degree <= 4.
  static constexpr double kNode = 0.7745966692414834;  // sqrt(3/5)
  static constexpr double kW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const std::size_t n = intervals();
  CompensatedSum s;
  for (std::size_t i = 0; i < n; ++i) {
    const double d0 = values_[i], d1 = values_[i + 1];
    if (d0 == 0.0 && d1 == 0.0) continue;
    const double x0 = node(i);
    for (int k = 0; k < 3; ++k) {
      const double t = 0.5 * (1.0 + (k - 1) * kNode);
      s += kW[k] * (d0 + t * (d1 - d0)) * f(x0 + t * step_);
    }
  }
  return step_ * s.value();
}

WassersteinOrder::WassersteinOrder(double p) : p_(p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw InvalidArgument("Wasserstein order must satisfy 1 <= p < inf");
}

// ---------------------------------------------------------------- pushforwards

AtomicMeasure reflect_shift(const AtomicMeasure& mu, double c) {
  const auto a = mu.atoms();
  const auto w = mu.weights();
  std::vector<double> atoms(a.size()), weights(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    atoms[a.size() - 1 - i] = c - a[i];
    weights[a.size() - 1 - i] = w[i];
  }
  if (mu.equal_weights()) return AtomicMeasure::equal_weight(std::move(atoms));
  return AtomicMeasure(std::move(atoms), std::move(weights));
}

GridMeasure reflect_shift(const GridMeasure& mu, double c) {
  std::vector<double> v(mu.values().rbegin(), mu.values().rend());
  return GridMeasure(c - mu.hi(), c - mu.lo(), std::move(v));
}

Measure reflect_shift(const Measure& mu, double c) {
  return std::visit([c](const auto& m) -> Measure { return reflect_shift(m, c); }, mu);
}

AtomicMeasure translate(const AtomicMeasure& mu, double s) {
  std::vector<double> atoms(mu.atoms().begin(), mu.atoms().end());
  for (double& x : atoms) x += s;
  if (mu.equal_weights()) return AtomicMeasure::equal_weight(std::move(atoms));
  return AtomicMeasure(std::move(atoms), std::vector<double>(mu.weights().begin(), mu.weights().end()));
}

GridMeasure translate(const GridMeasure& mu, double s) {
  return GridMeasure(mu.lo() + s, mu.hi() + s,
                     std::vector<double>(mu.values().begin(), mu.values().end()));
}

Measure translate(const Measure& mu, double s) {
  return std::visit([s](const auto& m) -> Measure { return translate(m, s); }, mu);
}

// ---------------------------------------------------------------- moments

double expect(const AtomicMeasure& mu, const std::function<double(double)>& f) {
  CompensatedSum s;
  const auto a = mu.atoms();
  const auto w = mu.weights();
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * f(a[i]);
  return s.value();
}

double expect(const Measure& mu, const std::function<double(double)>& f) {
  if (const auto* a = std::get_if<AtomicMeasure>(&mu)) return expect(*a, f);
  return std::get<GridMeasure>(mu).expect(f);
}

double moment(const Measure& mu, int k) {
  if (k < 0) throw InvalidArgument("moment: order must be nonnegative");
  if (k == 0) return 1.0;
  return expect(mu, [k](double x) { return std::pow(x, k); });
}

double mean(const Measure& mu) { return moment(mu, 1); }

double variance(const Measure& mu) {
  const double m = mean(mu);
  return expect(mu, [m](double x) { return (x - m) * (x - m); });
}

double support_min(const Measure& mu) {
  if (const auto* a = std::get_if<AtomicMeasure>(&mu)) return a->atoms().front();
  const auto& g = std::get<GridMeasure>(mu);
  return g.quantile(0.0);
}

double support_max(const Measure& mu) {
  if (const auto* a = std::get_if<AtomicMeasure>(&mu)) return a->atoms().back();
  const auto& g = std::get<GridMeasure>(mu);
  const auto v = g.values();
  std::size_t k = v.size() - 1;
  while (k > 0 && v[k] == 0.0 && v[k - 1] == 0.0) --k;
  return g.node(k);
}

// ---------------------------------------------------------------- transport

namespace {

// A piece of a quantile function on (u0, u1]: either constant (atom) or the
// inverse of the cdf inside one grid cell.
struct QuantilePiece {
  double u0, u1;
  bool atom;
  double x0;     // atom position or left node of the cell
  double rho;    // density at left node
  double slope;  // density slope inside the cell
  double h;

  double eval(double u) const {
    if (atom) return x0;
    return x0 + invert_cell(rho, slope, u - u0, h);
  }
};

std::vector<QuantilePiece> quantile_pieces(const AtomicMeasure& mu) {
  std::vector<QuantilePiece> out;
  out.reserve(mu.size());
  double u = 0.0;
  const auto a = mu.atoms();
  const auto w = mu.weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double next = i + 1 == a.size() ? 1.0 : u + w[i];
    out.push_back({u, next, true, a[i], 0.0, 0.0, 0.0});
    u = next;
  }
  return out;
}

std::vector<QuantilePiece> quantile_pieces(const GridMeasure& mu) {
  std::vector<QuantilePiece> out;
  const auto v = mu.values();
  const std::size_t n = mu.intervals();
  double u = 0.0;
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = 0.5 * mu.step() * (v[i] + v[i + 1]);
    if (m <= 0.0) continue;
    acc += m;
    const double next = acc.value();
    out.push_back({u, next, false, mu.node(i), v[i], (v[i + 1] - v[i]) / mu.step(), mu.step()});
    u = next;
  }
  if (!out.empty()) out.back().u1 = 1.0;
  return out;
}

std::vector<QuantilePiece> quantile_pieces(const Measure& mu) {
  return std::visit([](const auto& m) { return quantile_pieces(m); }, mu);
}

double piece_integral(const QuantilePiece& a, const QuantilePiece& b, double u0, double u1,
                      double p) {
  const double len = u1 - u0;
  if (len <= 0.0) return 0.0;
  if (a.atom && b.atom) return std::pow(std::abs(a.x0 - b.x0), p) * len;
  auto diff = [&](double u) { return a.eval(u) - b.eval(u); };
  auto integrand = [&](double u) { return std::pow(std::abs(diff(u)), p); };
  // Split once at a sign change so the kink of |.|^p sits on a panel boundary.
  const double d0 = diff(u0), d1 = diff(u1);
  if (d0 * d1 < 0.0) {
    double lo = u0, hi = u1, dlo = d0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double dm = diff(mid);
      if ((dm < 0.0) == (dlo < 0.0)) {
        lo = mid;
        dlo = dm;
      } else {
        hi = mid;
      }
    }
    const double r = 0.5 * (lo + hi);
    return integrate_gl(integrand, u0, r, 1, 8) + integrate_gl(integrand, r, u1, 1, 8);
  }
  return integrate_gl(integrand, u0, u1, 1, 8);
}

}  // namespace

double wasserstein(const Measure& mu, const Measure& nu, WassersteinOrder order) {
  const double p = order.value();
  const auto pa = quantile_pieces(mu);
  const auto pb = quantile_pieces(nu);
  CompensatedSum total;
  std::size_t i = 0, j = 0;
  double u = 0.0;
  while (i < pa.size() && j < pb.size()) {
    const double end = std::min(pa[i].u1, pb[j].u1);
    total += piece_integral(pa[i], pb[j], u, end, p);
    u = end;
    if (pa[i].u1 <= end) ++i;
    if (pb[j].u1 <= end) ++j;
  }
  const double s = std::max(0.0, total.value());
  return p == 1.0 ? s : std::pow(s, 1.0 / p);
}

AtomicMeasure quantile_discretize(const GridMeasure& nu, int n) {
  if (n < 2) throw InvalidArgument("quantile_discretize: N must be at least 2");
  std::vector<double> atoms(static_cast<std::size_t>(n - 1));
  for (int i = 1; i < n; ++i)
    atoms[static_cast<std::size_t>(i - 1)] = nu.quantile(static_cast<double>(i) / n);
  return AtomicMeasure::equal_weight(std::move(atoms));
}

Measure truncate_normalize(const Measure& mu, double m) {
  if (!(m > 0.0)) throw InvalidArgument("truncate_normalize: M must be positive");
  if (const auto* a = std::get_if<AtomicMeasure>(&mu)) {
    std::vector<double> atoms, weights;
    for (std::size_t i = 0; i < a->size(); ++i) {
      const double x = a->atoms()[i];
      if (x >= -m && x <= m) {
        atoms.push_back(x);
        weights.push_back(a->weights()[i]);
      }
    }
    const double mass = compensated_sum(weights);
    if (!(mass > 0.0)) throw InvalidArgument("truncate_normalize: window [-M, M] has zero mass");
    for (double& w : weights) w /= mass;
    return AtomicMeasure(std::move(atoms), std::move(weights));
  }
  const auto& g = std::get<GridMeasure>(mu);
  if (g.lo() >= -m && g.hi() <= m) return g;
  const double lo = std::max(g.lo(), -m), hi = std::min(g.hi(), m);
  if (!(lo < hi) || !(g.cdf(hi) - g.cdf(lo) > 0.0))
    throw InvalidArgument("truncate_normalize: window [-M, M] has zero mass");
  return GridMeasure::from_density(lo, hi, g.intervals(), [&](double x) { return g.density(x); });
}

AtomicMeasure mixture(const AtomicMeasure& a, const AtomicMeasure& b, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("mixture: t must lie in [0, 1]");
  std::vector<double> atoms(a.atoms().begin(), a.atoms().end());
  std::vector<double> weights;
  for (double w : a.weights()) weights.push_back((1.0 - t) * w);
  atoms.insert(atoms.end(), b.atoms().begin(), b.atoms().end());
  for (double w : b.weights()) weights.push_back(t * w);
  return AtomicMeasure(std::move(atoms), std::move(weights));
}

GridMeasure mixture(const GridMeasure& a, const GridMeasure& b, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("mixture: t must lie in [0, 1]");
  const double lo = std::min(a.lo(), b.lo()), hi = std::max(a.hi(), b.hi());
  const double h = std::min(a.step(), b.step());
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h));
  return GridMeasure::from_density(lo, hi, std::max<std::size_t>(n, 2), [&](double x) {
    return (1.0 - t) * a.density(x) + t * b.density(x);
  });
}

// ---------------------------------------------------------------- log energy

double log_energy_reg(const AtomicMeasure& mu, double m) {
  const auto a = mu.atoms();
  const auto w = mu.weights();
  CompensatedSum total;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CompensatedSum row;
    row += w[i] * m;
    for (std::size_t j = i + 1; j < a.size(); ++j)
      row += 2.0 * w[j] * std::min(-std::log(a[j] - a[i]), m);
    total += w[i] * row.value();
  }
  return total.value();
}

namespace {

// Second antiderivative of ln|x|, vanishing at 0.
double log_q(double x) {
  if (x == 0.0) return 0.0;
  return 0.5 * x * x * std::log(std::abs(x)) - 0.75 * x * x;
}

}  // namespace

std::vector<double> log_cell_kernel(std::size_t n) {
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = static_cast<double>(i);
    if (i < 8) {
      k[i] = log_q(m + 1.0) - 2.0 * log_q(m) + log_q(m - 1.0);
    } else {
      // ln m - sum_j 1 / (j (2j+1) (2j+2) m^{2j}); the second difference
      // above loses digits to cancellation for large m.
      const double inv2 = 1.0 / (m * m);
      double term = inv2, corr = 0.0;
      for (int j = 1; j <= 12; ++j) {
        corr += term / (j * (2.0 * j + 1.0) * (2.0 * j + 2.0));
        term *= inv2;
      }
      k[i] = std::log(m) - corr;
    }
  }
  return k;
}

double toeplitz_quadratic(std::span<const double> kernel, std::span<const double> m) {
  const std::size_t n = m.size();
  CompensatedSum total;
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i] == 0.0) continue;
    double row = kernel[0] * m[i];
    for (std::size_t j = i + 1; j < n; ++j) row += 2.0 * kernel[j - i] * m[j];
    total += m[i] * row;
  }
  return total.value();
}

double log_energy_grid(const GridMeasure& mu) {
  const auto masses = mu.cell_masses();
  const auto kernel = log_cell_kernel(masses.size());
  return std::log(mu.step()) + toeplitz_quadratic(kernel, masses);
}

double log_potential(const GridMeasure& mu, double x) {
  // int_{t0}^{t1} (alpha + s t) ln|t| dt with t = y - x.
  auto prim = [](double t, double alpha, double s) {
    if (t == 0.0) return 0.0;
    const double l = std::log(std::abs(t));
    return alpha * (t * l - t) + s * (0.5 * t * t * l - 0.25 * t * t);
  };
  const auto v = mu.values();
  const std::size_t n = mu.intervals();
  const double h = mu.step();
  CompensatedSum total;
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == 0.0 && v[i + 1] == 0.0) continue;
    const double s = (v[i + 1] - v[i]) / h;
    const double xi = mu.node(i);
    const double alpha = v[i] + s * (x - xi);
    total += prim(xi + h - x, alpha, s) - prim(xi - x, alpha, s);
  }
  return total.value();
}

}  // namespace betalab
