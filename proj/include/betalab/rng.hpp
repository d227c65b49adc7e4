#pragma once

#include <cstdint>
#include <limits>

namespace betalab {

/// Counter-based 64-bit generator. Output i of stream (seed, stream) is a
/// keyed hash of the counter i, so replicas keyed by (seed, replica index)
/// are independent and reproducible regardless of scheduling.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  /// Gamma(shape, 1) by Marsaglia–Tsang.
  double gamma(double shape) noexcept;
  /// Chi-distributed with `dof` degrees of freedom: sqrt(2 Gamma(dof/2)).
  double chi(double dof) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key0_;
  std::uint64_t key1_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace betalab
