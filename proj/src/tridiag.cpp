#include "betalab/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "betalab/error.hpp"

namespace betalab {

namespace {

void check_sizes(std::span<const double> d, std::span<const double> e) {
  if (d.empty()) throw InvalidArgument("tridiagonal: empty diagonal");
  if (e.size() + 1 != d.size()) throw InvalidArgument("tridiagonal: off-diagonal must have length n-1");
}

}  // namespace

std::vector<double> tridiag_eigenvalues(std::span<const double> diagonal,
                                        std::span<const double> offdiagonal) {
  check_sizes(diagonal, offdiagonal);
  const std::size_t n = diagonal.size();
  std::vector<double> d(diagonal.begin(), diagonal.end());
  std::vector<double> e(n, 0.0);
  std::copy(offdiagonal.begin(), offdiagonal.end(), e.begin());
  const double eps = std::numeric_limits<double>::epsilon();

  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    for (;;) {
      std::size_t m = l;
      for (; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (++iter > 60) throw ConvergenceError("tridiag_eigenvalues: QL iteration did not converge", std::abs(e[l]));
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (std::size_t i = m; i-- > l;) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
  std::sort(d.begin(), d.end());
  return d;
}

std::size_t sturm_count(std::span<const double> diagonal, std::span<const double> offdiagonal, double x) {
  check_sizes(diagonal, offdiagonal);
  const double tiny = std::numeric_limits<double>::min();
  std::size_t count = 0;
  double q = diagonal[0] - x;
  if (q == 0.0) q = -tiny;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < diagonal.size(); ++i) {
    q = diagonal[i] - x - offdiagonal[i - 1] * offdiagonal[i - 1] / q;
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

std::vector<double> tridiag_eigenvalues_bisection(std::span<const double> diagonal,
                                                  std::span<const double> offdiagonal) {
  check_sizes(diagonal, offdiagonal);
  const std::size_t n = diagonal.size();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double rad = (i > 0 ? std::abs(offdiagonal[i - 1]) : 0.0) + (i + 1 < n ? std::abs(offdiagonal[i]) : 0.0);
    lo = std::min(lo, diagonal[i] - rad);
    hi = std::max(hi, diagonal[i] + rad);
  }
  const double pad = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  lo -= pad;
  hi += pad;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    // The k-th eigenvalue (0-based) is the smallest x with count(x) > k.
    double a = lo, b = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (sturm_count(diagonal, offdiagonal, mid) > k)
        b = mid;
      else
        a = mid;
    }
    out[k] = 0.5 * (a + b);
  }
  return out;
}

}  // namespace betalab
