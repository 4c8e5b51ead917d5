#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spfc/compressor.hpp"
#include "spfc/matrix.hpp"
#include "spfc/operators.hpp"

namespace spfc {

// Everything the bound formulas depend on.
struct BoundInputs {
  double C = 1.0;  // scaling constant, >= 1
  double M = 0.0;  // operator deviation bound
  double K = 1.0;  // weight bound
  double p = 1.0;  // probability exponent, >= 1
  std::size_t n0 = 0;  // input dimension (columns of X, length of a neuron)
  std::size_t n1 = 0;  // output dimension (neurons)
  std::size_t m = 0;   // calibration data points
  std::vector<double> column_norms;  // ||X_i||, i = 1..n0

  double max_column_norm() const;
  void validate() const;
};

// beta_t = (C pi M^2 / 2) * max_{i<=t} ||X_i||^2; returned with beta[0] = 0 so
// beta[t] is indexed by step. Dominates the covariance of u_t.
std::vector<double> beta_sequence(const BoundInputs& in);

// Covariance majorant recursion
//   Sigma_t = (I - P_t/C) Sigma_{t-1} (I - P_t/C) + (pi M^2 / 2) X_t X_t^T,
// P_t the projector onto X_t. Returns Sigma_0..Sigma_{t_max}; a zero column
// makes the projector undefined and is an error naming t.
std::vector<DenseMatrix> sigma_recursion(const DenseMatrix& X, double C,
                                         double M, std::size_t t_max);

// High-probability radius on the max entrywise post-activation error:
// 4K sqrt(2 pi C p log N0) max||X_i|| for the 1-bit quantizer, with
// multipliers K and 2K for pruning and quantize-prune.
double kappa(const BoundInputs& in, OperatorKind kind);

// Theoretical failure mass (the probability the error/support guarantee may
// not hold), clamped to [0, 1]. The exponential sum runs from t = 2 and uses
// divisor 32*pi for the 1-bit quantizer and 8*pi for quantize-prune; the
// pruning bound has no exponential part.
double failure_probability(const BoundInputs& in, OperatorKind kind);

// Unclamped value of the same expression; >= 1 means the bound is vacuous at
// this scale.
double failure_probability_raw(const BoundInputs& in, OperatorKind kind);

// min(1, sqrt(2) n exp(-alpha^2 / (4 sigma2))): upper bound on
// P(||X||_inf > alpha) for X dominated by N(0, sigma2 I_n).
double gaussian_tail(double alpha, double sigma2, std::size_t n);

// Monte Carlo check of the Gaussian-domination tail: for each alpha on a
// grid, the empirical frequency of ||u||_inf > alpha must not exceed
// gaussian_tail(alpha, beta, m) + 3 binomial standard errors.
struct TailCheckRow {
  double alpha = 0.0;
  double bound = 0.0;      // clamped theoretical tail mass
  double empirical = 0.0;  // observed exceed frequency
  double slack = 0.0;      // 3 * sqrt(bound (1-bound) / trials)
  bool passed = false;
};

struct TailCheck {
  std::vector<TailCheckRow> rows;
  double worst_margin = 0.0;  // min over rows of bound + slack - empirical
  bool passed = false;
};

TailCheck verify_theorem(const std::vector<double>& u_inf_samples,
                         const BoundInputs& in, std::size_t grid_size = 10);

struct EmpiricalStats {
  std::size_t trials = 0;
  std::size_t error_exceed_count = 0;       // trials with max error > kappa
  std::size_t support_violation_count = 0;  // trials with some |Q_ij| > 2K
  double max_observed_error = 0.0;
};

struct BoundReport {
  double kappa = 0.0;
  double failure_probability = 0.0;  // clamped to [0, 1]
  bool vacuous = false;              // unclamped mass >= 1: bound says nothing
  std::vector<double> beta;
  EmpiricalStats empirical;
  double sparsity_fraction = 0.0;  // diagnostic, pruning kinds
  bool passed = false;  // union exceed frequency <= mass + 3 SE
};

// Runs `trials` single-layer compressions (shared mode, ReLU) against a fixed
// data matrix X with a fresh random weight matrix per trial, and checks the
// proposition: frequency of {max post-activation error > kappa, or support
// violated for the quantizing kinds} within the theoretical failure mass plus
// three binomial standard errors.
BoundReport verify_proposition(const DenseMatrix& X,
                               const CompressionConfig& cfg, double p,
                               std::size_t n1, std::size_t trials);

// Coherent adversarial instance: X is a single all-ones row (every column the
// same unit vector) and w_i = 0.999 K, so round-to-nearest accumulates error
// linearly in N0 while the stochastic path-following run does not.
struct RtnComparisonRow {
  std::size_t n0 = 0;
  double rtn_error = 0.0;   // measured ||X(w - q_rtn)||
  double spfc_error = 0.0;  // median over trials of ||X(w - q)||
  double kappa = 0.0;
  double ratio = 0.0;  // rtn_error / spfc_error
  double within_kappa_fraction = 0.0;
};

std::vector<RtnComparisonRow> rtn_comparison(
    const std::vector<std::size_t>& n0_list, double K, double C,
    std::uint64_t seed, std::size_t trials = 100, double p = 1.0);

// Paired-seed equivalence of running the compressor on X and on the reduced
// matrix diag(s) V^T from its SVD: identical q and equal error norms.
struct SvdEquivalenceResult {
  bool q_identical = false;
  double norm_rel_diff = 0.0;
  double error_norm_x = 0.0;
  double error_norm_reduced = 0.0;
  bool passed = false;
};

SvdEquivalenceResult svd_equivalence_experiment(const DenseMatrix& X,
                                                std::span<const double> w,
                                                const CompressionConfig& cfg);

}  // namespace spfc
