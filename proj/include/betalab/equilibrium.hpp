#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "betalab/measures.hpp"
#include "betalab/potential.hpp"

namespace betalab {

struct EquilibriumOptions {
  std::size_t grid = 4096;          // intervals of the tabulated density
  std::size_t chebyshev_nodes = 512;
  double newton_tol = 1e-12;
  int max_newton = 200;
  std::size_t analytic_nodes = 2048;  // quadrature against the closed-form density
};

/// Equilibrium measure mu_V of a convex potential.
///
/// The density is sqrt((x-a)(b-x)) h(x) / (2 pi) on [a, b] with h a
/// polynomial of degree p-2. `density` tabulates it on a uniform grid; the
/// rate functionals use that grid, while `expect` and `log_potential`
/// integrate against the closed form.
///
/// sigma comes from the Euler–Lagrange constant: 2 U(x) - V(x) = C on the
/// support gives Sigma = (int V dmu_V + C) / 2, with U(b) computed by
/// Gauss–Chebyshev quadrature. sigma_grid is the same quantity evaluated
/// on the tabulated density and serves as a consistency check.
struct EquilibriumResult {
  double a;
  double b;
  GridMeasure density;
  double c_v;
  double sigma;
  double potential_energy;  // int V dmu_V
  Polynomial h;
  double sigma_grid = 0.0;
  double potential_energy_grid = 0.0;
  int newton_iterations = 0;
  double endpoint_residual = 0.0;

  double density_at(double x) const;
  double expect(const std::function<double(double)>& f) const;
  /// int ln|x - y| dmu_V(y). Accurate for x outside (a, b) and at the endpoints.
  double log_potential(double x) const;

  std::vector<double> quad_nodes;    // y_k
  std::vector<double> quad_weights;  // sum to 1
};

EquilibriumResult solve_equilibrium(const Potential& v, const EquilibriumOptions& opts = {});

struct Support {
  double a;
  double b;
  int iterations;
  double residual;
};

/// Endpoint equations only (no density tabulation).
Support equilibrium_support(const Potential& v, const EquilibriumOptions& opts = {});

/// Rebuilds the tabulated density and quadrature from known endpoints and
/// h coefficients; sigma and c_V are recomputed the same way as in the solver.
EquilibriumResult equilibrium_from_parts(const Potential& v, double a, double b, Polynomial h,
                                         const EquilibriumOptions& opts = {});

/// tau_{b_V} mu_V, supported on [0, b_V - a_V].
GridMeasure nu_limit(const EquilibriumResult& eq);

/// Right-tail rate V(x) - 2 U(x) - (V(b) - 2 U(b)) with U the log potential of mu_V.
/// Rejects x < b_V.
double effective_potential_tail(const EquilibriumResult& eq, const Potential& v, double x);

// ----------------------------------------------------------- constrained problem

/// Discretized energy  -Sigma(mu) + int V dmu - c_V  over piecewise-constant
/// densities on n equal cells of [lo, hi], as a function of the cell masses.
/// Sigma is exact for such densities: ln h + m^T K m with K from log_cell_kernel.
class ConstrainedObjective {
 public:
  ConstrainedObjective(const Potential& v, double lo, double hi, std::size_t cells, double c_v);

  double value(std::span<const double> m) const;
  std::vector<double> gradient(std::span<const double> m) const;

  std::size_t cells() const noexcept { return linear_.size(); }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double step() const noexcept { return step_; }
  std::span<const double> kernel() const noexcept { return kernel_; }
  std::span<const double> linear() const noexcept { return linear_; }
  double constant() const noexcept { return constant_; }

 private:
  double lo_, hi_, step_;
  std::vector<double> kernel_;
  std::vector<double> linear_;  // cell averages of V
  double constant_;             // -ln h - c_V
};

struct ConstrainedOptions {
  std::size_t cells = 1200;
  double left_factor = 2.0;  // L = a_V - left_factor (b_V - a_V)
  double gap_tol = 1e-8;
  std::size_t max_iter = 100000;
};

struct ConstrainedEquilibriumResult {
  double cutoff;
  double lo;  // L
  std::vector<double> masses;
  GridMeasure minimizer;
  double value;  // J_V^-(cutoff)
  double gap;    // Frank–Wolfe duality gap at exit
  std::size_t iterations;
  bool converged;
};

/// Minimizes the discretized energy over measures supported in [L, x] by
/// pairwise Frank–Wolfe with exact line search.
ConstrainedEquilibriumResult constrained_equilibrium(const Potential& v, const EquilibriumResult& eq,
                                                     double x, const ConstrainedOptions& opts = {});

}  // namespace betalab
