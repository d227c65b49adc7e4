#include "betalab/dos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "betalab/error.hpp"
#include "betalab/numeric.hpp"

namespace betalab {

DosStatistics dos_measure(const SpectrumSample& sample, std::optional<double> b_v) {
  const auto& ev = sample.eigenvalues;
  if (ev.size() < 2) throw InvalidArgument("dos_measure: need at least two eigenvalues");
  const double top = ev.back();
  std::vector<double> gaps(ev.size() - 1);
  for (std::size_t k = 0; k + 1 < ev.size(); ++k) gaps[k] = top - ev[k];
  return DosStatistics{AtomicMeasure::equal_weight(gaps),
                       std::move(gaps),
                       top,
                       b_v ? top - *b_v : std::numeric_limits<double>::quiet_NaN(),
                       sample.n,
                       sample.beta,
                       sample.seed};
}

TestFunction TestFunction::polynomial(std::vector<double> coeffs) {
  Polynomial p(std::move(coeffs));
  Polynomial d1 = p.derivative();
  Polynomial d2 = d1.derivative();
  std::string name;
  for (std::size_t i = 0; i < p.coeffs().size(); ++i) {
    if (i) name += ',';
    name += std::to_string(p.coeffs()[i]);
  }
  return TestFunction{[p](double x) { return p(x); }, [d1](double x) { return d1(x); },
                      [d2](double x) { return d2(x); }, "poly(" + name + ")"};
}

double linear_statistic(const DosStatistics& stats, const TestFunction& f) {
  CompensatedSum s;
  for (double g : stats.gaps) s += f.f(g);
  return s.value();
}

double nu_expect(const EquilibriumResult& eq, const std::function<double(double)>& f) {
  const double b = eq.b;
  return eq.expect([&](double y) { return f(b - y); });
}

double delta_statistic(const SpectrumSample& sample, const EquilibriumResult& eq,
                       const std::function<double(double)>& f) {
  CompensatedSum s;
  for (double l : sample.eigenvalues) s += f(eq.b - l);
  s += -static_cast<double>(sample.eigenvalues.size()) * nu_expect(eq, f);
  return s.value();
}

TaylorSplit taylor_split(const SpectrumSample& sample, const EquilibriumResult& eq, const TestFunction& f) {
  const auto& ev = sample.eigenvalues;
  const double n = static_cast<double>(ev.size());
  const double eps = ev.back() - eq.b;
  CompensatedSum stat, main, first, rem;
  for (std::size_t k = 0; k < ev.size(); ++k) {
    const double y = eq.b - ev[k];
    const double fy = f.f(y), dfy = f.df(y);
    main += fy;
    first += eps * dfy;
    if (k + 1 < ev.size()) {
      const double g = ev.back() - ev[k];
      const double fg = f.f(g);
      stat += fg;
      rem += fg - fy - eps * dfy;
    }
  }
  // The k = N term of the Taylor sums has no counterpart in S_N.
  rem += -f.f(-eps) - eps * f.df(-eps);

  TaylorSplit t{};
  t.statistic = stat.value();
  t.main = main.value();
  t.first_order = first.value();
  t.remainder = rem.value();
  t.nu_f = nu_expect(eq, f.f);
  t.nu_df = nu_expect(eq, f.df);
  t.centered = t.statistic - n * t.nu_f;
  const double delta_f = t.main - n * t.nu_f;
  CompensatedSum sdf;
  for (double l : ev) sdf += f.df(eq.b - l);
  const double delta_df = sdf.value() - n * t.nu_df;
  t.identity_rhs = n * eps * t.nu_df + delta_f + eps * delta_df + t.remainder;
  return t;
}

std::vector<double> cheb_coefficients(const std::function<double(double)>& f, double a_v, double b_v,
                                      std::size_t k_max) {
  if (!(b_v > a_v)) throw InvalidArgument("cheb_coefficients: need a_V < b_V");
  const double half = 0.5 * (b_v - a_v);
  // Trapezoid on [0, pi] with endpoint half weights integrates cos(j t) exactly for j < 2m.
  const std::size_t m = std::max<std::size_t>(1024, 4 * (k_max + 1));
  std::vector<double> samples(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    const double t = std::numbers::pi * static_cast<double>(i) / static_cast<double>(m);
    samples[i] = f(half * (1.0 - std::cos(t)));
  }
  std::vector<double> out(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) {
    CompensatedSum s;
    for (std::size_t i = 0; i <= m; ++i) {
      const double w = (i == 0 || i == m) ? 0.5 : 1.0;
      // cos(k i pi / m) via the reduced index keeps the argument small.
      const std::size_t r = (k * i) % (2 * m);
      s += w * samples[i] * std::cos(std::numbers::pi * static_cast<double>(r) / static_cast<double>(m));
    }
    out[k] = 2.0 / static_cast<double>(m) * s.value();
  }
  return out;
}

CltVariance clt_variance(const std::vector<double>& coeffs, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("clt_variance: beta must be positive");
  CompensatedSum total, tail;
  const std::size_t k_max = coeffs.empty() ? 0 : coeffs.size() - 1;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double term = static_cast<double>(k) * coeffs[k] * coeffs[k];
    total += term;
    if (2 * k > k_max) tail += term;
  }
  const double scale = 1.0 / (4.0 * beta);
  return {scale * total.value(), scale * tail.value()};
}

double gaussian_bias(const Potential& v, const std::function<double(double)>& f, double beta) {
  if (!v.is_gaussian()) throw InvalidArgument("gaussian_bias: only the Gaussian potential x^2/2 is supported");
  if (!(beta > 0.0)) throw InvalidArgument("gaussian_bias: beta must be positive");
  // (1/2pi) int_{-2}^{2} g(t) / sqrt(4 - t^2) dt is half the arcsine mean of g(2u).
  const double arcsine = 0.5 * chebyshev_first_mean([&](double u) { return f(2.0 - 2.0 * u); }, 512);
  return (2.0 / beta - 1.0) * (0.25 * f(4.0) + 0.25 * f(0.0) - arcsine);
}

bool in_window(const SpectrumSample& sample, const EquilibriumResult& eq, double h) {
  return sample.eigenvalues.front() >= eq.a - h && sample.eigenvalues.back() <= eq.b + h;
}

double remainder_constant(const EquilibriumResult& eq, const TestFunction& f, double h) {
  const double lo = -h, hi = eq.b - eq.a + h;
  constexpr int kSamples = 8000;
  double m = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    const double x = lo + (hi - lo) * i / kSamples;
    m = std::max({m, std::abs(f.f(x)), std::abs(f.df(x)), 0.5 * std::abs(f.d2f(x))});
  }
  return m;
}

double ks_distance(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) throw InvalidArgument("ks_distance: empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

namespace {

double sorted_quantile(const std::vector<double>& s, double p) {
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

Histogram freedman_diaconis(std::vector<double> x, std::size_t max_bins) {
  if (x.empty()) throw InvalidArgument("freedman_diaconis: empty sample");
  std::sort(x.begin(), x.end());
  const double lo = x.front(), hi = x.back();
  const double iqr = sorted_quantile(x, 0.75) - sorted_quantile(x, 0.25);
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(x.size()));
  std::size_t bins = 1;
  if (hi > lo && width > 0.0) bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  bins = std::clamp<std::size_t>(bins, 1, std::max<std::size_t>(1, max_bins));

  Histogram h;
  h.edges.resize(bins + 1);
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + span * static_cast<double>(i) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (double v : x) {
    auto b = static_cast<std::size_t>((v - lo) / span * static_cast<double>(bins));
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

Moments sample_moments(const std::vector<double>& x) {
  if (x.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double n = static_cast<double>(x.size());
  const double m = compensated_sum(x) / n;
  if (x.size() < 2) return {m, std::numeric_limits<double>::quiet_NaN()};
  CompensatedSum ss;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, ss.value() / (n - 1.0)};
}

SpectrumSample sample_spectrum(const Potential& v, double beta, int n, std::uint64_t seed, std::uint64_t replica,
                               const McmcOptions& mcmc) {
  if (v.is_gaussian()) return sample_gaussian(n, beta, seed, replica);
  return sample_mcmc(v, beta, n, seed, replica, mcmc);
}

std::vector<ConvergenceLevel> dos_convergence(const Potential& v, const EquilibriumResult& eq, double beta,
                                              const std::vector<int>& sizes, std::size_t replicas,
                                              std::uint64_t seed, unsigned threads, const McmcOptions& mcmc) {
  if (replicas == 0) throw InvalidArgument("dos_convergence: need at least one replica");
  const Measure nu = nu_limit(eq);
  std::vector<ConvergenceLevel> out;
  for (int n : sizes) {
    ConvergenceLevel level{n, 0.0, std::vector<double>(replicas)};
    parallel_for(replicas, threads, [&](std::size_t r) {
      const auto s = sample_spectrum(v, beta, n, seed, r, mcmc);
      level.w1[r] = wasserstein(Measure(dos_measure(s).mu_n), nu, WassersteinOrder(1.0));
    });
    level.mean_w1 = compensated_sum(level.w1) / static_cast<double>(replicas);
    out.push_back(std::move(level));
  }
  return out;
}

const char* to_string(Regime r) noexcept { return r == Regime::edge ? "edge" : "bulk"; }

FluctuationReport fluctuation_ensemble(const Potential& v, const EquilibriumResult& eq, const TestFunction& f,
                                       const FluctuationConfig& config) {
  if (config.sizes.empty()) throw InvalidArgument("fluctuation_ensemble: no sizes given");
  if (config.replicas < 2) throw InvalidArgument("fluctuation_ensemble: need at least two replicas");
  if (!(config.window > 0.0)) throw InvalidArgument("fluctuation_ensemble: window H must be positive");

  FluctuationReport rep{};
  rep.nu_f = nu_expect(eq, f.f);
  rep.nu_df = nu_expect(eq, f.df);
  const double slope = std::abs(rep.nu_df);
  rep.regime = slope > config.regime_threshold ? Regime::edge : Regime::bulk;
  // Edge regime picked, but nu_V(f') is small enough that the bulk scaling may still be the right one.
  rep.ambiguous = slope > config.regime_threshold && slope < config.ambiguity_band;
  rep.remainder_constant = remainder_constant(eq, f, config.window);

  for (int n : config.sizes) {
    const double nn = static_cast<double>(n);
    const double scale = rep.regime == Regime::edge ? std::pow(nn, 2.0 / 3.0) : nn;
    FluctuationLevel lvl{};
    lvl.n = n;
    lvl.statistic.resize(config.replicas);
    lvl.centered.resize(config.replicas);
    lvl.lambda_max.resize(config.replicas);
    std::vector<char> inside(config.replicas), bound_failed(config.replicas);
    std::vector<double> residual(config.replicas);

    parallel_for(config.replicas, config.threads, [&](std::size_t r) {
      const auto s = sample_spectrum(v, config.beta, n, config.seed, r, config.mcmc);
      const auto t = taylor_split(s, eq, f);
      const double mu_f = t.statistic / (nn - 1.0);
      lvl.statistic[r] = scale * (mu_f - rep.nu_f);
      lvl.centered[r] = t.centered;
      lvl.lambda_max[r] = s.lambda_max();
      residual[r] = std::abs(t.centered - t.identity_rhs);
      inside[r] = in_window(s, eq, config.window);
      const double eps = s.lambda_max() - eq.b;
      const double bound = rep.remainder_constant * (nn * eps * eps + std::abs(eps) + 1.0);
      bound_failed[r] = inside[r] && std::abs(t.remainder) > bound;
    });

    std::size_t outside = 0;
    for (std::size_t r = 0; r < config.replicas; ++r) {
      outside += inside[r] ? 0 : 1;
      lvl.remainder_bound_failures += bound_failed[r] ? 1 : 0;
      lvl.max_identity_residual = std::max(lvl.max_identity_residual, residual[r]);
    }
    lvl.window_violation_rate = static_cast<double>(outside) / static_cast<double>(config.replicas);
    lvl.statistic_moments = sample_moments(lvl.statistic);
    lvl.centered_moments = sample_moments(lvl.centered);
    lvl.histogram = freedman_diaconis(lvl.statistic);
    rep.levels.push_back(std::move(lvl));
  }
  for (std::size_t i = 1; i < rep.levels.size(); ++i)
    rep.ks.push_back({rep.levels[i - 1].n, rep.levels[i].n,
                      ks_distance(rep.levels[i - 1].statistic, rep.levels[i].statistic)});
  return rep;
}

}  // namespace betalab
