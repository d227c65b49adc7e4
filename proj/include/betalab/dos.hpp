#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "betalab/equilibrium.hpp"
#include "betalab/measures.hpp"
#include "betalab/potential.hpp"
#include "betalab/sampler.hpp"

namespace betalab {

/// Gaps from the top eigenvalue, and the empirical measure they carry.
struct DosStatistics {
  AtomicMeasure mu_n;       // (1/(N-1)) sum_k delta_{lambda_max - lambda_k}
  std::vector<double> gaps;  // lambda_max - lambda_k, k = 1..N-1, decreasing
  double lambda_max;
  double epsilon;  // lambda_max - b_V, NaN when b_V is not supplied
  int n;
  double beta;
  std::uint64_t seed;
};

DosStatistics dos_measure(const SpectrumSample& sample, std::optional<double> b_v = std::nullopt);

/// A C^2 test function given with its analytic derivatives.
struct TestFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
  std::string name;

  static TestFunction polynomial(std::vector<double> coeffs);  // ascending powers
  static TestFunction constant(double c) { return polynomial({c}); }
  static TestFunction identity() { return polynomial({0.0, 1.0}); }
  /// (x - c)^2
  static TestFunction shifted_square(double c) { return polynomial({c * c, -2.0 * c, 1.0}); }
};

/// S_N(f) = sum_k f(lambda_max - lambda_k) over the N-1 gaps.
double linear_statistic(const DosStatistics& stats, const TestFunction& f);

/// nu_V(f) with nu_V the reflected equilibrium measure, by quadrature.
double nu_expect(const EquilibriumResult& eq, const std::function<double(double)>& f);

/// Delta_N(f) = sum_i f(b_V - lambda_i) - N nu_V(f), over all N eigenvalues.
double delta_statistic(const SpectrumSample& sample, const EquilibriumResult& eq,
                       const std::function<double(double)>& f);

/// Second-order Taylor bookkeeping of S_N(f) around b_V.
struct TaylorSplit {
  double statistic;       // S_N(f)
  double main;            // sum_i f(b_V - lambda_i)
  double first_order;     // epsilon sum_i f'(b_V - lambda_i)
  double remainder;       // R_N(f)
  double centered;        // S_N(f) - N nu_V(f)
  double identity_rhs;    // N eps nu(f') + Delta(f) + eps Delta(f') + R_N
  double nu_f;
  double nu_df;
};

/// R_N(f) is computed from its definition: the sum of the per-gap Taylor
/// remainders minus the k = N term f(-eps) + eps f'(-eps).
TaylorSplit taylor_split(const SpectrumSample& sample, const EquilibriumResult& eq, const TestFunction& f);

/// a_0..a_k_max of f((b-a)/2 (1 - cos t)) in cos(k t), trapezoid rule in t.
std::vector<double> cheb_coefficients(const std::function<double(double)>& f, double a_v, double b_v,
                                      std::size_t k_max);

struct CltVariance {
  double value;  // (1/(4 beta)) sum_k k a_k^2
  double tail;   // contribution of the upper half of the retained indices
};

CltVariance clt_variance(const std::vector<double>& coeffs, double beta);

/// (2/beta - 1) int f(2 - t) d gamma_V(t) for V(x) = x^2/2, with
/// gamma_V = (delta_{-2} + delta_2)/4 - dt / (2 pi sqrt(4 - t^2)).
double gaussian_bias(const Potential& v, const std::function<double(double)>& f, double beta);

/// Window K_H: every eigenvalue lies in [a_V - H, b_V + H].
bool in_window(const SpectrumSample& sample, const EquilibriumResult& eq, double h);

/// M(H) with |R_N(f)| <= M (N eps^2 + |eps| + 1) on K_H: the largest of
/// sup|f|, sup|f'| and sup|f''|/2 over [-H, b_V - a_V + H].
double remainder_constant(const EquilibriumResult& eq, const TestFunction& f, double h);

/// Two-sample Kolmogorov–Smirnov statistic sup |F_x - F_y|.
double ks_distance(std::vector<double> x, std::vector<double> y);

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;
};

/// Freedman–Diaconis bin width 2 IQR n^{-1/3}; at most max_bins bins.
Histogram freedman_diaconis(std::vector<double> x, std::size_t max_bins = 200);

/// Mean and unbiased variance with compensated sums.
struct Moments {
  double mean;
  double variance;
};
Moments sample_moments(const std::vector<double>& x);

/// Sample for one replica: the tridiagonal model for the Gaussian potential,
/// Metropolis otherwise.
SpectrumSample sample_spectrum(const Potential& v, double beta, int n, std::uint64_t seed, std::uint64_t replica,
                               const McmcOptions& mcmc = {});

struct ConvergenceLevel {
  int n;
  double mean_w1;
  std::vector<double> w1;  // per replica
};

/// Mean d_W1(mu_N, nu_V) over replicas for each N.
std::vector<ConvergenceLevel> dos_convergence(const Potential& v, const EquilibriumResult& eq, double beta,
                                              const std::vector<int>& sizes, std::size_t replicas,
                                              std::uint64_t seed, unsigned threads = 0,
                                              const McmcOptions& mcmc = {});

enum class Regime { edge, bulk };  // nu_V(f') != 0, nu_V(f') == 0

const char* to_string(Regime r) noexcept;

struct FluctuationConfig {
  double beta = 2.0;
  std::vector<int> sizes;
  std::size_t replicas = 100;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  double window = 1.0;  // H
  double regime_threshold = 1e-8;
  double ambiguity_band = 1e-4;
  McmcOptions mcmc;
};

struct FluctuationLevel {
  int n;
  std::vector<double> statistic;  // scaled per the regime: N^{2/3} or N times (mu_N(f) - nu_V(f))
  std::vector<double> centered;   // S_N(f) - N nu_V(f)
  std::vector<double> lambda_max;
  Moments statistic_moments;
  Moments centered_moments;
  Histogram histogram;
  double window_violation_rate;
  std::size_t remainder_bound_failures;  // replicas in K_H with |R_N| above the bound
  double max_identity_residual;          // largest |lhs - rhs| of the Taylor identity
};

struct KsPair {
  int n1;
  int n2;
  double distance;
};

struct FluctuationReport {
  Regime regime;
  bool ambiguous;
  double nu_f;
  double nu_df;
  double remainder_constant;
  std::vector<FluctuationLevel> levels;
  std::vector<KsPair> ks;  // consecutive sizes
};

FluctuationReport fluctuation_ensemble(const Potential& v, const EquilibriumResult& eq, const TestFunction& f,
                                       const FluctuationConfig& config);

}  // namespace betalab
