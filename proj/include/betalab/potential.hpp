#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "betalab/error.hpp"
#include "betalab/measures.hpp"

namespace betalab {

/// Outcome of the convexity check. On rejection `witness` is a point where V'' < 0.
struct ConvexityCheck {
  bool accepted;
  std::optional<double> witness;
  double min_second_derivative;
};

class NotConvexError : public InvalidArgument {
 public:
  NotConvexError(const std::string& what, double witness)
      : InvalidArgument(what), witness_(witness) {}
  double witness() const noexcept { return witness_; }

 private:
  double witness_;
};

/// Real polynomial in ascending coefficient order.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);

  double operator()(double x) const noexcept;
  Polynomial derivative() const;
  /// Antiderivative vanishing at 0.
  Polynomial antiderivative() const;
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }

 private:
  std::vector<double> coeffs_{0.0};
};

/// All distinct real roots, ascending.
std::vector<double> real_roots(const Polynomial& p);

/// Convex polynomial potential V of even degree p >= 2 with positive leading coefficient.
class Potential {
 public:
  /// Throws InvalidArgument for bad degree/leading coefficient and
  /// NotConvexError (with witness) when V'' takes a negative value.
  explicit Potential(std::vector<double> coeffs);

  /// Parses "c0,c1,...,cp".
  static Potential parse(std::string_view text);
  static Potential gaussian() { return Potential({0.0, 0.0, 0.5}); }

  double operator()(double x) const noexcept { return v_(x); }
  double eval(double x) const noexcept { return v_(x); }
  /// order 1 or 2.
  double deriv(double x, int order) const;

  int degree() const noexcept { return v_.degree(); }
  const std::vector<double>& coeffs() const noexcept { return v_.coeffs(); }
  const Polynomial& polynomial() const noexcept { return v_; }
  const Polynomial& first() const noexcept { return d1_; }
  const Polynomial& second() const noexcept { return d2_; }
  /// Average of V over [a, b] (exact).
  double cell_average(double a, double b) const;

  /// True for V(x) = x^2 / 2.
  bool is_gaussian() const noexcept;
  /// Canonical "c0,c1,...,cp" with shortest round-trip digits.
  std::string to_string() const;

 private:
  Polynomial v_, d1_, d2_, anti_;
};

/// Exact sign analysis of V'': the minimum of V'' is attained at a real
/// root of V''' (or V'' is constant).
ConvexityCheck validate_convex(const std::vector<double>& coeffs);

/// The unique root of c -> int V'(c - x) dnu(x).
double kappa(const Potential& v, const Measure& nu);

/// G_V(nu) = int V(kappa_V(nu) - x) dnu(x).
double g_value(const Potential& v, const Measure& nu);

}  // namespace betalab
