#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace betalab {

/// Finite weighted point measure with strictly increasing support.
///
/// Construction sorts the atoms, merges duplicates (adding their weights),
/// drops zero-weight atoms and renormalizes so the weights sum to 1.
class AtomicMeasure {
 public:
  AtomicMeasure(std::vector<double> atoms, std::vector<double> weights);

  /// Equal weights 1/n. The equal-weight flag survives only if no atoms merged.
  static AtomicMeasure equal_weight(std::vector<double> atoms);
  static AtomicMeasure dirac(double x);

  std::span<const double> atoms() const noexcept { return atoms_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool equal_weights() const noexcept { return equal_; }

 private:
  AtomicMeasure() = default;
  void canonicalize(bool equal);

  std::vector<double> atoms_;
  std::vector<double> weights_;
  bool equal_ = false;
};

/// Probability density sampled at n+1 uniform nodes on [lo, hi], interpreted
/// as piecewise linear between nodes and zero outside. Values are rescaled
/// at construction so the trapezoid integral is exactly 1.
class GridMeasure {
 public:
  GridMeasure(double lo, double hi, std::vector<double> values);

  static GridMeasure from_density(double lo, double hi, std::size_t intervals,
                                  const std::function<double(double)>& density);
  /// Cell masses m_i on [lo, hi]. Each node takes the mean of the adjacent
  /// cell densities (zero outside), then the result is renormalized.
  static GridMeasure from_cell_masses(double lo, double hi, std::span<const double> masses);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t intervals() const noexcept { return values_.size() - 1; }
  double step() const noexcept { return step_; }
  double node(std::size_t i) const noexcept {
    return i + 1 == values_.size() ? hi_ : lo_ + step_ * static_cast<double>(i);
  }
  std::span<const double> values() const noexcept { return values_; }

  double density(double x) const noexcept;
  /// Trapezoid mass of each of the n cells.
  std::vector<double> cell_masses() const;
  double cdf(double x) const noexcept;
  /// inf { x : F(x) >= u }, u in [0, 1].
  double quantile(double u) const;
  /// Integral of f against the piecewise-linear density (3-point Gauss per cell).
  double expect(const std::function<double(double)>& f) const;

 private:
  double lo_;
  double hi_;
  double step_;
  std::vector<double> values_;
  std::vector<double> cum_;  // cum_[i] = F(node(i))
};

using Measure = std::variant<AtomicMeasure, GridMeasure>;

/// Order of a Wasserstein distance; p >= 1.
class WassersteinOrder {
 public:
  explicit WassersteinOrder(double p);
  double value() const noexcept { return p_; }

 private:
  double p_;
};

// Pushforward by x -> c - x.
AtomicMeasure reflect_shift(const AtomicMeasure& mu, double c);
GridMeasure reflect_shift(const GridMeasure& mu, double c);
Measure reflect_shift(const Measure& mu, double c);

// Pushforward by x -> x + s.
AtomicMeasure translate(const AtomicMeasure& mu, double s);
GridMeasure translate(const GridMeasure& mu, double s);
Measure translate(const Measure& mu, double s);

double expect(const Measure& mu, const std::function<double(double)>& f);
double expect(const AtomicMeasure& mu, const std::function<double(double)>& f);
double moment(const Measure& mu, int k);
double mean(const Measure& mu);
double variance(const Measure& mu);
double support_min(const Measure& mu);
double support_max(const Measure& mu);

double wasserstein(const Measure& mu, const Measure& nu, WassersteinOrder p);

/// The N-1 equal-weight atoms x^{i,N} = inf { x : F(x) >= i/N }.
AtomicMeasure quantile_discretize(const GridMeasure& nu, int n);

/// Restriction of mu to [-M, M], renormalized.
Measure truncate_normalize(const Measure& mu, double m);

/// Convex combination (1-t) a + t b. Grid inputs are resampled onto a common
/// grid covering both supports.
AtomicMeasure mixture(const AtomicMeasure& a, const AtomicMeasure& b, double t);
GridMeasure mixture(const GridMeasure& a, const GridMeasure& b, double t);

/// Regularized log energy  double-integral of min(-ln|x-y|, M); diagonal pairs contribute M.
double log_energy_reg(const AtomicMeasure& mu, double m);

/// Sigma(mu) = double integral of ln|x-y| for a grid measure.
///
/// Each cell carries its trapezoid mass spread uniformly; the cell-pair
/// integrals of ln|x-y| are then exact (see log_cell_kernel), so the
/// singular diagonal needs no special casing.
double log_energy_grid(const GridMeasure& mu);

/// int ln|x-y| dmu(y), exact for the piecewise-linear density.
double log_potential(const GridMeasure& mu, double x);

/// K[m] = int_0^1 int_0^1 ln|m + s - t| ds dt, for m = 0..n-1. The
/// double integral of ln|x-y| over cells I, J of width h, divided by h^2,
/// equals ln h + K[|I-J|].
std::vector<double> log_cell_kernel(std::size_t n);

/// Quadratic form sum_{I,J} m_I m_J K[|I-J|] with a Toeplitz kernel.
double toeplitz_quadratic(std::span<const double> kernel, std::span<const double> m);

}  // namespace betalab
