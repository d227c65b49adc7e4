#include "betalab/rates.hpp"

#include <cmath>

#include "betalab/error.hpp"
#include "betalab/numeric.hpp"

namespace betalab {

namespace {

RateEvaluation make(std::string name, std::pair<double, std::optional<double>> sigma, double potential,
                    double c_v, double offset = 0.0) {
  RateEvaluation r{std::move(name), sigma.first, potential, c_v, offset, 0.0, sigma.second};
  r.value = r.sigma_term + r.potential_term - r.c_v - r.offset;
  return r;
}

void require_half_line(const Measure& nu, const char* who) {
  const double lo = support_min(nu);
  const double scale = std::max(1.0, std::abs(support_max(nu)));
  if (lo < -1e-12 * scale) throw InvalidArgument(std::string(who) + ": measure must be supported in [0, inf)");
}

double shifted_potential(const Potential& v, double c, const Measure& nu) {
  return expect(nu, [&](double x) { return v(c - x); });
}

}  // namespace

std::pair<double, std::optional<double>> neg_log_energy(const Measure& mu, const RateOptions& opts) {
  if (const auto* a = std::get_if<AtomicMeasure>(&mu)) {
    const double m = opts.reg_m.value_or(2.0 * std::log(static_cast<double>(a->size())));
    return {log_energy_reg(*a, m), m};
  }
  return {-log_energy_grid(std::get<GridMeasure>(mu)), std::nullopt};
}

RateEvaluation rate_iv(const EquilibriumResult& eq, const Potential& v, const Measure& mu,
                       const RateOptions& opts) {
  return make("I_V", neg_log_energy(mu, opts), expect(mu, [&](double x) { return v(x); }), eq.c_v);
}

RateEvaluation rate_cal_i(const EquilibriumResult& eq, const Potential& v, double c, const Measure& nu,
                          const RateOptions& opts) {
  require_half_line(nu, "rate_cal_i");
  return make("calI_V", neg_log_energy(nu, opts), shifted_potential(v, c, nu), eq.c_v);
}

RateEvaluation rate_idos(const EquilibriumResult& eq, const Potential& v, const Measure& nu,
                         const RateOptions& opts) {
  require_half_line(nu, "rate_idos");
  return make("I_V^DOS", neg_log_energy(nu, opts), g_value(v, nu), eq.c_v);
}

RateEvaluation rate_idos_gaussian(const Measure& nu, const RateOptions& opts) {
  require_half_line(nu, "rate_idos_gaussian");
  return make("I_V^DOS(gaussian)", neg_log_energy(nu, opts), 0.5 * variance(nu), 0.75);
}

RateEvaluation rate_cal_j(const EquilibriumResult& eq, const Potential& v,
                          const ConstrainedEquilibriumResult& constrained, const Measure& nu,
                          const RateOptions& opts) {
  if (!(constrained.cutoff < eq.b))
    throw InvalidArgument("rate_cal_j: requires c < b_V; use rate_cal_i for c >= b_V");
  require_half_line(nu, "rate_cal_j");
  return make("calJ_V", neg_log_energy(nu, opts), shifted_potential(v, constrained.cutoff, nu), eq.c_v,
              constrained.value);
}

double projection_j(const EquilibriumResult& eq, const Potential& v, double c, const ConstrainedOptions& opts) {
  if (c >= eq.b) return 0.0;
  const auto res = constrained_equilibrium(v, eq, c, opts);
  if (!res.converged)
    throw ConvergenceError("projection_j: constrained solver did not reach its duality gap", res.gap);
  return res.value;
}

double rate_cal_i_delta(const EquilibriumResult& eq, const Potential& v, double c, double delta,
                        const Measure& nu, const RateOptions& opts) {
  if (!(delta >= 0.0)) throw InvalidArgument("rate_cal_i_delta: delta must be nonnegative");
  require_half_line(nu, "rate_cal_i_delta");
  const double sigma = neg_log_energy(nu, opts).first;
  // a -> int V(a - x) dnu is convex, so the interval minimum is unimodal.
  const auto best = golden_section([&](double a) { return shifted_potential(v, a, nu); }, c, c + delta, 1e-9);
  return sigma + best.value - eq.c_v;
}

double rate_cal_j_delta(const EquilibriumResult& eq, const Potential& v,
                        const ConstrainedEquilibriumResult& constrained, double delta, const Measure& nu,
                        const RateOptions& opts) {
  if (!(delta >= 0.0)) throw InvalidArgument("rate_cal_j_delta: delta must be nonnegative");
  require_half_line(nu, "rate_cal_j_delta");
  const double c = constrained.cutoff;
  const double sigma = neg_log_energy(nu, opts).first;
  const auto best = golden_section([&](double a) { return shifted_potential(v, a, nu); }, c - delta, c, 1e-9);
  return sigma + best.value - eq.c_v - constrained.value;
}

}  // namespace betalab
