#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace betalab {

/// Neumaier-compensated accumulator. Used wherever ensemble sums must not
/// depend on summation order beyond the last ulp.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss–Legendre rule on [-1, 1].
const QuadratureRule& gauss_legendre(std::size_t n);

/// Integrates f over [a, b] with a composite Gauss–Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    std::size_t panels = 1, std::size_t order = 8);

/// Mean of g over the arcsine law on [-1, 1], i.e. (1/pi) * int g(u)/sqrt(1-u^2) du,
/// by n-point Gauss–Chebyshev (first kind). Exact for polynomials of degree < 2n.
double chebyshev_first_mean(const std::function<double(double)>& g, std::size_t n);

/// (2/pi) * int g(u) sqrt(1-u^2) du by n-point Gauss–Chebyshev (second kind);
/// the weight integrates to 1.
double chebyshev_second_mean(const std::function<double(double)>& g, std::size_t n);

struct ScalarMinimum {
  double x;
  double value;
};

/// Golden-section search for the minimum of a unimodal f on [lo, hi].
ScalarMinimum golden_section(const std::function<double(double)>& f, double lo,
                             double hi, double tol = 1e-6);

/// Calls body(i) for i in [0, count) on up to `threads` worker threads.
/// threads == 0 means hardware concurrency. Each index is visited exactly once.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace betalab
