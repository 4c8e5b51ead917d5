#pragma once

#include <cstddef>
#include <vector>

#include "spfc/matrix.hpp"

namespace spfc {

// Thin SVD truncated at the numerical rank r.
struct SvdFactors {
  DenseMatrix u;                        // m x r, orthonormal columns
  std::vector<double> singular_values;  // length r, nonincreasing, positive
  DenseMatrix vt;                       // r x n, orthonormal rows

  std::size_t rank() const noexcept { return singular_values.size(); }

  // diag(singular_values) * vt; the r x n reduced data matrix.
  DenseMatrix sigma_vt() const;
};

// One-sided Jacobi SVD. Sweeps until the largest relative off-diagonal Gram
// entry max |<B_p,B_q>| / (|B_p||B_q|) drops below 1e-12; throws after the
// sweep cap with the residual in the message. Singular values at or below
// rank_tol * s_max are truncated.
SvdFactors svd(const DenseMatrix& m, double rank_tol = 1e-10);

// Largest eigenvalue of a symmetric matrix by power iteration on the
// Gershgorin-shifted matrix, with a Rayleigh-quotient estimate. Input must be
// symmetric within 1e-10 (relative); it is symmetrized as (S + S^T)/2 before
// iterating.
double max_eigenvalue(const DenseMatrix& s);

}  // namespace spfc
