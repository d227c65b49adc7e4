#pragma once

#include <optional>
#include <utility>
#include <string>

#include "betalab/equilibrium.hpp"
#include "betalab/measures.hpp"
#include "betalab/potential.hpp"

namespace betalab {

/// One evaluated rate functional, with its terms kept apart:
/// value == sigma_term + potential_term - c_v - offset.
struct RateEvaluation {
  std::string functional;
  double sigma_term;      // -Sigma(mu), or -Sigma^M(mu) for atomic inputs
  double potential_term;  // int V dmu, int V d tau_c nu, or G_V(nu)
  double c_v;
  double offset = 0.0;  // J_V^-(c) for the conditional functional, else 0
  double value;
  std::optional<double> regularization;  // M, when Sigma^M was used
};

struct RateOptions {
  /// Cap M for atomic measures. Defaults to 2 ln N for N atoms.
  std::optional<double> reg_m;
};

/// -Sigma(mu) (or -Sigma^M(mu)) and the M used.
std::pair<double, std::optional<double>> neg_log_energy(const Measure& mu, const RateOptions& opts = {});

/// I_V(mu) = -Sigma(mu) + int V dmu - c_V.
RateEvaluation rate_iv(const EquilibriumResult& eq, const Potential& v, const Measure& mu,
                       const RateOptions& opts = {});

/// I_V(c, nu) = I_V(tau_c nu) for nu on the half-line.
RateEvaluation rate_cal_i(const EquilibriumResult& eq, const Potential& v, double c, const Measure& nu,
                          const RateOptions& opts = {});

/// I_V^DOS(nu) = -Sigma(nu) + G_V(nu) - c_V.
RateEvaluation rate_idos(const EquilibriumResult& eq, const Potential& v, const Measure& nu,
                         const RateOptions& opts = {});

/// Closed form for V(x) = x^2/2: -Sigma(nu) + Var(nu)/2 - 3/4.
RateEvaluation rate_idos_gaussian(const Measure& nu, const RateOptions& opts = {});

/// J_V(c, nu) = I_V(c, nu) - J_V^-(c) for c < b_V, using a solved constrained problem at c.
RateEvaluation rate_cal_j(const EquilibriumResult& eq, const Potential& v,
                          const ConstrainedEquilibriumResult& constrained, const Measure& nu,
                          const RateOptions& opts = {});

/// Projection J_V(c): 0 for c >= b_V, J_V^-(c) otherwise.
double projection_j(const EquilibriumResult& eq, const Potential& v, double c,
                    const ConstrainedOptions& opts = {});

/// inf over a in [c, c + delta] of I_V(a, nu).
double rate_cal_i_delta(const EquilibriumResult& eq, const Potential& v, double c, double delta,
                        const Measure& nu, const RateOptions& opts = {});

/// inf over a in [c - delta, c] of I_V(a, nu), minus J_V^-(c).
double rate_cal_j_delta(const EquilibriumResult& eq, const Potential& v,
                        const ConstrainedEquilibriumResult& constrained, double delta, const Measure& nu,
                        const RateOptions& opts = {});

}  // namespace betalab
