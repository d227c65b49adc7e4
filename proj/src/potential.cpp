#include "betalab/potential.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "betalab/numeric.hpp"

namespace betalab {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  if (coeffs_.empty()) coeffs_.push_back(0.0);
}

double Polynomial::operator()(double x) const noexcept {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial({0.0});
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
  std::vector<double> a(coeffs_.size() + 1, 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) a[k + 1] = coeffs_[k] / static_cast<double>(k + 1);
  return Polynomial(std::move(a));
}

namespace {

double bisect_root(const Polynomial& p, double lo, double hi) {
  double flo = p(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = p(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> real_roots(const Polynomial& p) {
  const int deg = p.degree();
  const auto& c = p.coeffs();
  if (deg <= 0) return {};
  if (deg == 1) return {-c[0] / c[1]};
  // Roots of p are separated by the critical points.
  const auto crit = real_roots(p.derivative());
  double bound = 0.0;
  for (int k = 0; k < deg; ++k) bound = std::max(bound, std::abs(c[k] / c[deg]));
  bound += 1.0;
  std::vector<double> pts;
  pts.push_back(-bound);
  for (double x : crit) pts.push_back(std::clamp(x, -bound, bound));
  pts.push_back(bound);
  std::vector<double> roots;
  const double scale = std::abs(c[deg]) * std::pow(bound, deg);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double fi = p(pts[i]);
    if (std::abs(fi) <= 1e-14 * scale && i > 0 && i + 1 < pts.size()) roots.push_back(pts[i]);
    if (i + 1 == pts.size()) break;
    const double fj = p(pts[i + 1]);
    if ((fi < 0.0 && fj > 0.0) || (fi > 0.0 && fj < 0.0))
      roots.push_back(bisect_root(p, pts[i], pts[i + 1]));
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); }),
              roots.end());
  return roots;
}

ConvexityCheck validate_convex(const std::vector<double>& coeffs) {
  const Polynomial v(coeffs);
  const Polynomial d2 = v.derivative().derivative();
  std::vector<double> candidates = real_roots(d2.derivative());
  if (candidates.empty()) candidates.push_back(0.0);
  double best_x = candidates.front();
  double best = d2(best_x);
  for (double x : candidates) {
    const double val = d2(x);
    if (val < best) {
      best = val;
      best_x = x;
    }
  }
  double scale = 0.0;
  for (double a : d2.coeffs()) scale = std::max(scale, std::abs(a));
  if (best < -1e-12 * std::max(scale, 1.0)) return {false, best_x, best};
  return {true, std::nullopt, best};
}

Potential::Potential(std::vector<double> coeffs) : v_(std::move(coeffs)) {
  for (double c : v_.coeffs())
    if (!std::isfinite(c)) throw InvalidArgument("potential: non-finite coefficient");
  const int p = v_.degree();
  if (p < 2 || p % 2 != 0) throw InvalidArgument("potential: degree must be even and >= 2");
  if (!(v_.coeffs().back() > 0.0)) throw InvalidArgument("potential: leading coefficient must be positive");
  const auto check = validate_convex(v_.coeffs());
  if (!check.accepted) {
    std::ostringstream os;
    os << "potential: not convex, V''(" << *check.witness << ") = " << check.min_second_derivative;
    throw NotConvexError(os.str(), *check.witness);
  }
  d1_ = v_.derivative();
  d2_ = d1_.derivative();
  anti_ = v_.antiderivative();
}

Potential Potential::parse(std::string_view text) {
  std::vector<double> coeffs;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string_view tok = text.substr(pos, comma - pos);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
      throw InvalidArgument("potential: cannot parse coefficient '" + std::string(tok) + "'");
    coeffs.push_back(value);
    pos = comma + 1;
  }
  return Potential(std::move(coeffs));
}

double Potential::deriv(double x, int order) const {
  if (order == 1) return d1_(x);
  if (order == 2) return d2_(x);
  throw InvalidArgument("potential: derivative order must be 1 or 2");
}

double Potential::cell_average(double a, double b) const {
  if (a == b) return v_(a);
  return (anti_(b) - anti_(a)) / (b - a);
}

bool Potential::is_gaussian() const noexcept {
  const auto& c = v_.coeffs();
  return c.size() == 3 && c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.5;
}

std::string Potential::to_string() const {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < coeffs().size(); ++i) {
    if (i) out += ',';
    const auto res = std::to_chars(buf, buf + sizeof buf, coeffs()[i]);
    out.append(buf, res.ptr);
  }
  return out;
}

namespace {

struct CenteringFunction {
  const Potential& v;
  const Measure& nu;
  double value(double c) const {
    return expect(nu, [&](double x) { return v.first()(c - x); });
  }
  double slope(double c) const {
    return expect(nu, [&](double x) { return v.second()(c - x); });
  }
};

}  // namespace

double kappa(const Potential& v, const Measure& nu) {
  const CenteringFunction f{v, nu};
  const double m = mean(nu);
  const double spread = std::sqrt(std::max(0.0, variance(nu)));
  double step = std::max(spread, 1e-3 * (1.0 + std::abs(m)));
  double lo = m, hi = m;
  double flo = f.value(m), fhi = flo;
  if (flo == 0.0) return m;
  // c -> int V'(c - x) dnu is nondecreasing: expand toward the sign change.
  for (int it = 0; it < 200 && flo > 0.0; ++it) {
    hi = lo;
    fhi = flo;
    lo -= step;
    step *= 2.0;
    flo = f.value(lo);
  }
  for (int it = 0; it < 200 && fhi < 0.0; ++it) {
    lo = hi;
    flo = fhi;
    hi += step;
    step *= 2.0;
    fhi = f.value(hi);
  }
  if (flo > 0.0 || fhi < 0.0) throw ConvergenceError("kappa: no sign change found", std::min(std::abs(flo), std::abs(fhi)));
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;

  // Safeguarded Newton (Newton inside the bracket, bisection otherwise).
  const double width0 = hi - lo;
  double c = 0.5 * (lo + hi);
  double dx_old = hi - lo, dx = dx_old;
  double fc = f.value(c), dfc = f.slope(c);
  for (int it = 0; it < 400; ++it) {
    if (fc == 0.0) break;
    if (fc < 0.0)
      lo = c;
    else
      hi = c;
    const bool newton_ok = dfc > 0.0 && ((c - hi) * dfc - fc) * ((c - lo) * dfc - fc) < 0.0 &&
                           std::abs(2.0 * fc) < std::abs(dx_old * dfc);
    dx_old = dx;
    if (newton_ok) {
      dx = fc / dfc;
      c -= dx;
    } else {
      dx = 0.5 * (hi - lo);
      c = lo + dx;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(c)) || std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(c))) break;
    fc = f.value(c);
    dfc = f.slope(c);
  }
  // A flat section would make the root non-unique; an even-degree convex
  // polynomial only allows this for degenerate inputs, which we report.
  if (f.slope(c) == 0.0) {
    const double probe = 1e-6 * width0;
    if (f.value(c - probe) == 0.0 && f.value(c + probe) == 0.0)
      throw InvalidArgument("kappa: the centering equation has an interval of roots");
  }
  return c;
}

double g_value(const Potential& v, const Measure& nu) {
  const double k = kappa(v, nu);
  return expect(nu, [&](double x) { return v(k - x); });
}

}  // namespace betalab
