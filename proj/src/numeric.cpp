#include "betalab/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>

#include "betalab/error.hpp"

namespace betalab {

double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

namespace {

QuadratureRule build_gauss_legendre(std::size_t n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(std::size_t n) {
  if (n == 0) throw InvalidArgument("gauss_legendre: order must be positive");
  static std::mutex mu;
  static std::map<std::size_t, QuadratureRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
  return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    std::size_t panels, std::size_t order) {
  const auto& rule = gauss_legendre(order);
  const double width = (b - a) / static_cast<double>(panels);
  CompensatedSum total;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    const double mid = lo + 0.5 * width;
    for (std::size_t k = 0; k < order; ++k)
      total += 0.5 * width * rule.weights[k] * f(mid + 0.5 * width * rule.nodes[k]);
  }
  return total.value();
}

double chebyshev_first_mean(const std::function<double(double)>& g, std::size_t n) {
  CompensatedSum s;
  for (std::size_t k = 0; k < n; ++k)
    s += g(std::cos(std::numbers::pi * (k + 0.5) / static_cast<double>(n)));
  return s.value() / static_cast<double>(n);
}

double chebyshev_second_mean(const std::function<double(double)>& g, std::size_t n) {
  CompensatedSum s;
  const double np1 = static_cast<double>(n + 1);
  for (std::size_t k = 1; k <= n; ++k) {
    const double th = std::numbers::pi * static_cast<double>(k) / np1;
    const double sn = std::sin(th);
    s += sn * sn * g(std::cos(th));
  }
  return 2.0 * s.value() / np1;
}

ScalarMinimum golden_section(const std::function<double(double)>& f, double lo,
                             double hi, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  ScalarMinimum best{a, f(a)};
  for (double x : {b, 0.5 * (a + b)}) {
    const double fx = f(x);
    if (fx < best.value) best = {x, fx};
  }
  return best;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next = count;
          return;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace betalab
