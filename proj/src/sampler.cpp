#include "betalab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "betalab/equilibrium.hpp"
#include "betalab/error.hpp"
#include "betalab/numeric.hpp"
#include "betalab/tridiag.hpp"

namespace betalab {

const char* to_string(SampleMethod m) noexcept {
  return m == SampleMethod::tridiagonal ? "tridiagonal" : "mcmc";
}

std::uint64_t replica_stream(int n, std::uint64_t replica) noexcept {
  return (static_cast<std::uint64_t>(n) << 40) ^ replica;
}

int make_strictly_increasing(std::vector<double>& x) {
  std::sort(x.begin(), x.end());
  int nudged = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) {
      x[i] = std::nextafter(x[i - 1], std::numeric_limits<double>::infinity());
      ++nudged;
    }
  }
  return nudged;
}

SpectrumSample sample_gaussian(int n, double beta, std::uint64_t seed, std::uint64_t replica) {
  if (n < 2) throw InvalidArgument("sample_gaussian: N must be at least 2");
  if (!(beta > 0.0)) throw InvalidArgument("sample_gaussian: beta must be positive");
  CounterRng rng(seed, replica_stream(n, replica));
  const double nb = static_cast<double>(n) * beta;
  const double diag_scale = std::sqrt(2.0 / nb);
  const double off_scale = 1.0 / std::sqrt(nb);
  std::vector<double> d(static_cast<std::size_t>(n)), e(static_cast<std::size_t>(n - 1));
  for (auto& x : d) x = diag_scale * rng.normal();
  for (int k = 1; k < n; ++k) e[static_cast<std::size_t>(k - 1)] = off_scale * rng.chi(beta * (n - k));

  SpectrumSample s;
  s.eigenvalues = tridiag_eigenvalues(d, e);
  s.ties_perturbed = make_strictly_increasing(s.eigenvalues);
  s.n = n;
  s.beta = beta;
  s.potential = Potential::gaussian().to_string();
  s.seed = seed;
  s.replica = replica;
  s.method = SampleMethod::tridiagonal;
  return s;
}

double log_gas_log_density(const Potential& v, double beta, std::span<const double> x) {
  const std::size_t n = x.size();
  CompensatedSum pair, conf;
  for (std::size_t i = 0; i < n; ++i) {
    conf += v(x[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::abs(x[i] - x[j]);
      if (d == 0.0) return -std::numeric_limits<double>::infinity();
      pair += std::log(d);
    }
  }
  return beta * (pair.value() - 0.5 * static_cast<double>(n) * conf.value());
}

double log_gas_delta(const Potential& v, double beta, std::span<const double> x, std::size_t i, double y) {
  const double xi = x[i];
  // Product of distance ratios, renormalized to stay in range; one log at the end.
  double prod = 1.0;
  int exponent = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j == i) continue;
    const double num = y - x[j];
    if (num == 0.0) return -std::numeric_limits<double>::infinity();
    prod *= std::abs(num / (xi - x[j]));
    if ((j & 15) == 15) {
      int e = 0;
      prod = std::frexp(prod, &e);
      exponent += e;
    }
  }
  const double log_ratio = std::log(prod) + exponent * std::numbers::ln2;
  return beta * (log_ratio - 0.5 * static_cast<double>(x.size()) * (v(y) - v(xi)));
}

SpectrumSample sample_mcmc(const Potential& v, double beta, int n, std::uint64_t seed, std::uint64_t replica,
                           const McmcOptions& opts) {
  if (n < 2) throw InvalidArgument("sample_mcmc: N must be at least 2");
  if (!(beta > 0.0)) throw InvalidArgument("sample_mcmc: beta must be positive");
  const auto nn = static_cast<std::size_t>(n);
  const std::size_t burn_in = opts.burn_in.value_or(20 * nn);
  const std::size_t sweeps = opts.sweeps.value_or(burn_in + 5 * nn);
  if (sweeps < burn_in) throw InvalidArgument("sample_mcmc: sweeps must be at least burn-in");
  if (!(opts.target_acceptance > 0.0 && opts.target_acceptance < 1.0))
    throw InvalidArgument("sample_mcmc: target acceptance must lie in (0, 1)");

  const Support sup = equilibrium_support(v);
  const double centre = 0.5 * (sup.a + sup.b), radius = 0.5 * (sup.b - sup.a);
  CounterRng rng(seed, replica_stream(n, replica) ^ 0x4d434d43ULL);

  // Overdispersed start: evenly spread over 1.5x the limiting support, jittered.
  std::vector<double> x(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    const double u = (static_cast<double>(i) + 0.25 + 0.5 * rng.uniform()) / static_cast<double>(nn);
    x[i] = centre + 1.5 * radius * (2.0 * u - 1.0);
  }
  double log_step = std::log(opts.step.value_or(2.0 * radius / static_cast<double>(nn)));

  std::size_t accepted_after = 0, proposed_after = 0;
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    const double step = std::exp(log_step);
    std::size_t acc = 0;
    for (std::size_t i = 0; i < nn; ++i) {
      const double y = x[i] + step * rng.normal();
      const double delta = log_gas_delta(v, beta, x, i, y);
      if (delta >= 0.0 || std::log(rng.uniform()) < delta) {
        x[i] = y;
        ++acc;
      }
    }
    const double rate = static_cast<double>(acc) / static_cast<double>(nn);
    if (sweep < burn_in) {
      // Robbins–Monro on log step size.
      log_step += (rate - opts.target_acceptance) / std::sqrt(1.0 + static_cast<double>(sweep));
    } else {
      accepted_after += acc;
      proposed_after += nn;
    }
  }

  SpectrumSample s;
  s.eigenvalues = std::move(x);
  s.ties_perturbed = make_strictly_increasing(s.eigenvalues);
  s.n = n;
  s.beta = beta;
  s.potential = v.to_string();
  s.seed = seed;
  s.replica = replica;
  s.method = SampleMethod::mcmc;
  s.acceptance_rate = proposed_after ? static_cast<double>(accepted_after) / static_cast<double>(proposed_after)
                                     : std::numeric_limits<double>::quiet_NaN();
  s.step = std::exp(log_step);
  s.sweeps = sweeps;
  return s;
}

}  // namespace betalab
