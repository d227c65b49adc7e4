#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace betalab {

/// Eigenvalues of the symmetric tridiagonal matrix with the given diagonal
/// (length n) and off-diagonal (length n-1), ascending. Implicit-shift QL.
std::vector<double> tridiag_eigenvalues(std::span<const double> diagonal,
                                        std::span<const double> offdiagonal);

/// Number of eigenvalues strictly below x (Sturm sequence count).
std::size_t sturm_count(std::span<const double> diagonal, std::span<const double> offdiagonal, double x);

/// Same spectrum by bisection on Sturm counts; O(n^2) per call, kept as an
/// independent route.
std::vector<double> tridiag_eigenvalues_bisection(std::span<const double> diagonal,
                                                  std::span<const double> offdiagonal);

}  // namespace betalab
