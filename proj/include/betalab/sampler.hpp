#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "betalab/potential.hpp"
#include "betalab/rng.hpp"

namespace betalab {

enum class SampleMethod { tridiagonal, mcmc };

const char* to_string(SampleMethod m) noexcept;

/// One ordered eigenvalue configuration drawn from
/// |Delta(lambda)|^beta exp(-(N beta / 2) sum V(lambda_k)).
struct SpectrumSample {
  std::vector<double> eigenvalues;  // strictly increasing
  int n = 0;
  double beta = 0.0;
  std::string potential;  // canonical coefficient string
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  SampleMethod method = SampleMethod::tridiagonal;
  double acceptance_rate = 0.0;  // post-burn-in, MCMC only
  double step = 0.0;             // frozen proposal scale, MCMC only
  std::size_t sweeps = 0;
  int ties_perturbed = 0;  // equal neighbours nudged apart to keep strict order

  double lambda_max() const { return eigenvalues.back(); }
};

/// Stream id for replica r of size N under one root seed.
std::uint64_t replica_stream(int n, std::uint64_t replica) noexcept;

/// Gaussian beta-ensemble via the tridiagonal model: diagonal N(0, 2/(N beta)),
/// off-diagonal chi_{beta(N-k)} / sqrt(N beta). The ESD converges to the
/// semicircle on [-2, 2].
SpectrumSample sample_gaussian(int n, double beta, std::uint64_t seed, std::uint64_t replica = 0);

struct McmcOptions {
  std::optional<std::size_t> sweeps;   // total, including burn-in; default 25 N
  std::optional<std::size_t> burn_in;  // default 20 N
  std::optional<double> step;          // initial proposal scale
  double target_acceptance = 0.35;
};

/// Log-density beta [ sum_{i<j} ln|x_i - x_j| - (N/2) sum V(x_k) ], up to the normalization.
double log_gas_log_density(const Potential& v, double beta, std::span<const double> x);

/// Change in log_gas_log_density when coordinate i moves to y.
double log_gas_delta(const Potential& v, double beta, std::span<const double> x, std::size_t i, double y);

/// Single-site Metropolis on the log-gas with Gaussian proposals. The step
/// is tuned toward the target acceptance during burn-in, then frozen.
SpectrumSample sample_mcmc(const Potential& v, double beta, int n, std::uint64_t seed,
                           std::uint64_t replica = 0, const McmcOptions& opts = {});

/// Sorts and nudges exact ties apart; returns how many were nudged.
int make_strictly_increasing(std::vector<double>& x);

}  // namespace betalab
