#include "spfc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spfc/error.hpp"
#include "spfc/rng.hpp"

namespace spfc {

DenseMatrix SvdFactors::sigma_vt() const {
  DenseMatrix out = vt;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j)
      out(i, j) *= singular_values[i];
  return out;
}

namespace {

constexpr double kJacobiTol = 1e-12;
constexpr int kMaxSweeps = 100;

// One-sided Jacobi on the columns of a (m >= n assumed by the caller).
SvdFactors svd_tall(const DenseMatrix& a, double rank_tol) {
  const std::size_t m = a.rows(), n = a.cols();
  // column-major working copies
  std::vector<double> b(m * n), v(n * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) b[j * m + i] = a(i, j);
  for (std::size_t j = 0; j < n; ++j) v[j * n + j] = 1.0;

  double residual = 0.0;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    residual = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* bp = &b[p * m];
        double* bq = &b[q * m];
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          app += bp[i] * bp[i];
          aqq += bq[i] * bq[i];
          apq += bp[i] * bq[i];
        }
        if (app == 0.0 || aqq == 0.0) continue;
        const double rel = std::abs(apq) / std::sqrt(app * aqq);
        residual = std::max(residual, rel);
        if (rel <= kJacobiTol) continue;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = bp[i], y = bq[i];
          bp[i] = cs * x - sn * y;
          bq[i] = sn * x + cs * y;
        }
        double* vp = &v[p * n];
        double* vq = &v[q * n];
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i], y = vq[i];
          vp[i] = cs * x - sn * y;
          vq[i] = sn * x + cs * y;
        }
      }
    }
    converged = residual <= kJacobiTol;
  }
  if (!converged)
    throw Error("svd: Jacobi iteration did not converge after " +
                std::to_string(kMaxSweeps) +
                " sweeps, off-diagonal residual " + std::to_string(residual));

  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += b[j * m + i] * b[j * m + i];
    s[j] = std::sqrt(acc);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return s[x] > s[y]; });

  const double smax = s[order[0]];
  if (smax == 0.0) throw Error("svd: input has rank 0");
  std::size_t r = 0;
  while (r < n && s[order[r]] > rank_tol * smax) ++r;

  SvdFactors f;
  f.singular_values.resize(r);
  f.u = DenseMatrix(m, r);
  f.vt = DenseMatrix(r, n);
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t j = order[k];
    f.singular_values[k] = s[j];
    for (std::size_t i = 0; i < m; ++i) f.u(i, k) = b[j * m + i] / s[j];
    for (std::size_t i = 0; i < n; ++i) f.vt(k, i) = v[j * n + i];
  }
  return f;
}

}  // namespace

SvdFactors svd(const DenseMatrix& a, double rank_tol) {
  if (a.rows() >= a.cols()) return svd_tall(a, rank_tol);
  // A = (A^T)^T: factor the transpose and swap the sides.
  SvdFactors ft = svd_tall(transpose(a), rank_tol);
  SvdFactors f;
  f.singular_values = std::move(ft.singular_values);
  f.u = transpose(ft.vt);
  f.vt = transpose(ft.u);
  return f;
}

double max_eigenvalue(const DenseMatrix& s) {
  if (s.rows() != s.cols())
    throw Error("max_eigenvalue: matrix not square: " + s.shape_string());
  const std::size_t n = s.rows();
  double max_abs = 0.0, max_asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      max_abs = std::max(max_abs, std::abs(s(i, j)));
      max_asym = std::max(max_asym, std::abs(s(i, j) - s(j, i)));
    }
  if (max_asym > 1e-10 * std::max(1.0, max_abs))
    throw Error("max_eigenvalue: matrix not symmetric, |S - S^T| up to " +
                std::to_string(max_asym));
  if (max_abs == 0.0) return 0.0;

  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (s(i, j) + s(j, i));

  // Gershgorin shift makes the iterated matrix PSD so the power method finds
  // the largest (not largest-magnitude) eigenvalue.
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(a(i, j));
    shift = std::max(shift, row);
  }
  for (std::size_t i = 0; i < n; ++i) a(i, i) += shift;

  RngStream rng(0x5eedf00dULL);  // fixed start vector, deterministic result
  std::vector<double> vec(n);
  for (auto& x : vec) x = rng.next_double() - 0.5;
  double nrm = norm2(vec);
  for (auto& x : vec) x /= nrm;

  std::vector<double> av(n);
  double lambda = 0.0, prev = 0.0;
  int stable = 0;
  const std::size_t max_iters = 1000000;
  for (std::size_t it = 0; it < max_iters; ++it) {
    av = matvec(a, vec);
    lambda = dot(vec, av);  // Rayleigh quotient, ||vec|| == 1
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = av[i] - lambda * vec[i];
      resid += d * d;
    }
    const double an = norm2(av);
    if (an == 0.0) return -shift;  // a v = 0: top eigenvalue of a is 0
    if (std::sqrt(resid) <= 1e-12 * std::max(lambda, 1e-300)) break;
    // clustered top eigenvalues: the vector wanders inside the cluster span
    // while the Rayleigh quotient has already settled
    stable = std::abs(lambda - prev) <= 1e-14 * std::max(std::abs(lambda), 1.0)
                 ? stable + 1
                 : 0;
    if (stable >= 4) break;
    prev = lambda;
    for (std::size_t i = 0; i < n; ++i) vec[i] = av[i] / an;
  }
  return lambda - shift;
}

}  // namespace spfc
