#include "spfc/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "spfc/error.hpp"
#include "spfc/linalg.hpp"

namespace spfc {

double BoundInputs::max_column_norm() const {
  double mx = 0.0;
  for (double v : column_norms) mx = std::max(mx, v);
  return mx;
}

void BoundInputs::validate() const {
  if (!(C >= 1.0)) throw Error("bounds: C must be >= 1");
  if (!(p >= 1.0)) throw Error("bounds: p must be >= 1");
  if (!(M >= 0.0)) throw Error("bounds: M must be nonnegative");
  if (column_norms.size() != n0)
    throw Error("bounds: column_norms has length " +
                std::to_string(column_norms.size()) + ", expected n0 = " +
                std::to_string(n0));
  for (double v : column_norms)
    if (!(v >= 0.0)) throw Error("bounds: column norms must be nonnegative");
}

std::vector<double> beta_sequence(const BoundInputs& in) {
  in.validate();
  std::vector<double> beta(in.n0 + 1, 0.0);
  const double factor = in.C * M_PI * in.M * in.M / 2.0;
  double running_max_sq = 0.0;
  for (std::size_t t = 1; t <= in.n0; ++t) {
    const double nt = in.column_norms[t - 1];
    running_max_sq = std::max(running_max_sq, nt * nt);
    beta[t] = factor * running_max_sq;
  }
  return beta;
}

std::vector<DenseMatrix> sigma_recursion(const DenseMatrix& X, double C,
                                         double M, std::size_t t_max) {
  if (!(C >= 1.0)) throw Error("sigma_recursion: C must be >= 1");
  if (t_max > X.cols())
    throw Error("sigma_recursion: t_max " + std::to_string(t_max) +
                " exceeds column count " + std::to_string(X.cols()));
  const std::size_t m = X.rows();
  const double noise = M_PI * M * M / 2.0;

  std::vector<DenseMatrix> sigma;
  sigma.reserve(t_max + 1);
  sigma.emplace_back(m, m);  // Sigma_0 = 0
  for (std::size_t t = 1; t <= t_max; ++t) {
    const std::vector<double> xt = column(X, t - 1);
    const double n2 = dot(xt, xt);
    if (n2 == 0.0)
      throw Error("sigma_recursion: zero column at t = " + std::to_string(t) +
                  ", projector undefined");
    // A = I - P/C with P = x x^T / ||x||^2
    DenseMatrix a = DenseMatrix::identity(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) a(i, j) -= xt[i] * xt[j] / (C * n2);
    DenseMatrix next = matmul(matmul(a, sigma.back()), a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) next(i, j) += noise * xt[i] * xt[j];
    sigma.push_back(std::move(next));
  }
  return sigma;
}

namespace {

double kappa_multiplier(double K, OperatorKind kind) {
  switch (kind) {
    case OperatorKind::OneBitQuantize: return 4.0 * K;
    case OperatorKind::QuantizePrune: return 2.0 * K;
    case OperatorKind::Prune: return K;
    default:
      throw Error("kappa: no error radius for operator kind " +
                  to_string(kind));
  }
}

}  // namespace

double kappa(const BoundInputs& in, OperatorKind kind) {
  in.validate();
  if (in.n0 < 2) throw Error("kappa: need n0 >= 2 so that log N0 > 0");
  return kappa_multiplier(in.K, kind) *
         std::sqrt(2.0 * M_PI * in.C * in.p * std::log(double(in.n0))) *
         in.max_column_norm();
}

double failure_probability_raw(const BoundInputs& in, OperatorKind kind) {
  in.validate();
  const double sqrt2 = std::sqrt(2.0);
  double mass =
      sqrt2 * double(in.m) * double(in.n1) * std::pow(double(in.n0), -in.p);
  double divisor = 0.0;
  if (kind == OperatorKind::OneBitQuantize) divisor = 32.0 * M_PI;
  else if (kind == OperatorKind::QuantizePrune) divisor = 8.0 * M_PI;
  else if (kind != OperatorKind::Prune)
    throw Error("failure_probability: no bound for operator kind " +
                to_string(kind));
  if (divisor > 0.0) {
    // sum starts at t = 2: the t = 1 event has probability zero since u_0 = 0
    double sum = 0.0;
    double prev_max_sq = 0.0;
    for (std::size_t t = 1; t <= in.n0; ++t) {
      const double nt = in.column_norms[t - 1];
      if (t >= 2 && prev_max_sq > 0.0)
        sum += sqrt2 * std::exp(-in.C * nt * nt / (divisor * prev_max_sq));
      prev_max_sq = std::max(prev_max_sq, nt * nt);
    }
    mass += double(in.n1) * sum;
  }
  return mass;
}

double failure_probability(const BoundInputs& in, OperatorKind kind) {
  return std::clamp(failure_probability_raw(in, kind), 0.0, 1.0);
}

double gaussian_tail(double alpha, double sigma2, std::size_t n) {
  if (!(sigma2 > 0.0)) throw Error("gaussian_tail: sigma2 must be positive");
  if (!(alpha >= 0.0)) throw Error("gaussian_tail: alpha must be nonnegative");
  return std::min(1.0, std::sqrt(2.0) * double(n) *
                           std::exp(-alpha * alpha / (4.0 * sigma2)));
}

TailCheck verify_theorem(const std::vector<double>& u_inf_samples,
                         const BoundInputs& in, std::size_t grid_size) {
  if (u_inf_samples.size() < 50)
    throw Error("verify_theorem: need at least 50 trials, got " +
                std::to_string(u_inf_samples.size()));
  if (grid_size == 0) throw Error("verify_theorem: empty alpha grid");
  const double beta = beta_sequence(in).back();
  const double trials = double(u_inf_samples.size());

  // Grid reaches the alpha where the theoretical tail mass drops to 1e-4;
  // beyond that no exceedance is statistically tolerable at these trial
  // counts, which is exactly what a corrupted update would trip.
  const double alpha_ref =
      beta > 0.0
          ? 2.0 * std::sqrt(beta * std::log(std::sqrt(2.0) * double(in.m) * 1e4))
          : 1.0;

  TailCheck check;
  check.passed = true;
  check.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j <= grid_size; ++j) {
    TailCheckRow row;
    row.alpha = alpha_ref * double(j) / double(grid_size);
    row.bound = beta > 0.0 ? gaussian_tail(row.alpha, beta, in.m) : 0.0;
    std::size_t exceed = 0;
    for (double s : u_inf_samples)
      if (s > row.alpha) ++exceed;
    row.empirical = double(exceed) / trials;
    row.slack = 3.0 * std::sqrt(row.bound * (1.0 - row.bound) / trials);
    row.passed = row.empirical <= row.bound + row.slack;
    check.worst_margin =
        std::min(check.worst_margin, row.bound + row.slack - row.empirical);
    check.passed = check.passed && row.passed;
    check.rows.push_back(row);
  }
  return check;
}

namespace {

std::vector<double> column_norms_of(const DenseMatrix& X) {
  std::vector<double> norms(X.cols());
  for (std::size_t j = 0; j < X.cols(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) acc += X(i, j) * X(i, j);
    norms[j] = std::sqrt(acc);
  }
  return norms;
}

DenseMatrix random_weights(std::size_t n0, std::size_t n1, double K,
                           std::uint64_t seed) {
  DenseMatrix w(n0, n1);
  RngStream rng(seed);
  for (double& e : w.data()) {
    double u;
    do {
      u = rng.next_double();
    } while (u == 0.0);
    e = (2.0 * u - 1.0) * K;
  }
  return w;
}

}  // namespace

BoundReport verify_proposition(const DenseMatrix& X,
                               const CompressionConfig& cfg, double p,
                               std::size_t n1, std::size_t trials) {
  cfg.validate();
  if (trials == 0) throw Error("verify_proposition: trials must be positive");
  if (n1 == 0) throw Error("verify_proposition: n1 must be positive");
  const OperatorKind kind = cfg.op.kind;
  if (kind != OperatorKind::OneBitQuantize && kind != OperatorKind::Prune &&
      kind != OperatorKind::QuantizePrune)
    throw Error("verify_proposition: no proposition for operator kind " +
                to_string(kind));

  BoundInputs in;
  in.C = cfg.scaling;
  in.M = deviation_bound(cfg.op).M;
  in.K = cfg.op.K;
  in.p = p;
  in.n0 = X.cols();
  in.n1 = n1;
  in.m = X.rows();
  in.column_norms = column_norms_of(X);

  BoundReport report;
  report.kappa = kappa(in, kind);
  const double raw_mass = failure_probability_raw(in, kind);
  report.failure_probability = std::clamp(raw_mass, 0.0, 1.0);
  report.vacuous = raw_mass >= 1.0;
  report.beta = beta_sequence(in);
  report.empirical.trials = trials;

  const bool check_support = kind == OperatorKind::OneBitQuantize ||
                             kind == OperatorKind::QuantizePrune;
  const double support_limit = 2.0 * cfg.op.K;

  std::mutex agg_mutex;
  double total_sparsity = 0.0;
  std::size_t union_count = 0;  // trials tripping error bound or support
  std::atomic<std::size_t> next{0};
  std::size_t threads = cfg.threads == 0
                            ? std::max(1u, std::thread::hardware_concurrency())
                            : cfg.threads;
  threads = std::min(threads, trials);

  auto worker = [&] {
    std::size_t exceed = 0, viol = 0, both = 0;
    double max_err = 0.0, sparsity = 0.0;
    for (;;) {
      const std::size_t trial = next.fetch_add(1);
      if (trial >= trials) break;
      const std::uint64_t trial_seed = mix(cfg.master_seed, trial);
      CompressionConfig tcfg = cfg;
      tcfg.master_seed = trial_seed;
      tcfg.threads = 1;  // parallelism lives at the trial level here
      const DenseMatrix W =
          random_weights(in.n0, n1, cfg.op.K, mix(trial_seed, 0x57454947ULL));
      const LayerResult lr = compress_layer(W, X, X, tcfg, 0);
      const LayerStats st =
          layer_stats(W, X, X, lr.q, Activation::Relu, cfg.op);
      max_err = std::max(max_err, st.max_abs_error_post);
      bool bad_support = false;
      if (check_support)
        for (double q : lr.q.data())
          if (std::abs(q) > support_limit) bad_support = true;
      const bool bad_error = st.max_abs_error_post > report.kappa;
      if (bad_error) ++exceed;
      if (bad_support) ++viol;
      if (bad_error || bad_support) ++both;
      sparsity += st.sparsity_fraction;
    }
    std::lock_guard<std::mutex> lock(agg_mutex);
    report.empirical.error_exceed_count += exceed;
    report.empirical.support_violation_count += viol;
    report.empirical.max_observed_error =
        std::max(report.empirical.max_observed_error, max_err);
    union_count += both;
    total_sparsity += sparsity;
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  report.sparsity_fraction = total_sparsity / double(trials);
  const double freq = double(union_count) / double(trials);
  const double mass = report.failure_probability;
  const double se = std::sqrt(mass * (1.0 - mass) / double(trials));
  report.passed = freq <= mass + 3.0 * se;
  return report;
}

std::vector<RtnComparisonRow> rtn_comparison(
    const std::vector<std::size_t>& n0_list, double K, double C,
    std::uint64_t seed, std::size_t trials, double p) {
  if (trials == 0) throw Error("rtn_comparison: trials must be positive");
  OperatorSpec rtn_spec{OperatorKind::RtnOneBit, K, 0.5};
  OperatorSpec onebit_spec{OperatorKind::OneBitQuantize, K, 0.5};

  std::vector<RtnComparisonRow> rows;
  for (std::size_t n0 : n0_list) {
    if (n0 < 2) throw Error("rtn_comparison: N0 must be at least 2");
    // every column of X the same unit vector; with m = 1 that is just 1
    const DenseMatrix X(1, n0, std::vector<double>(n0, 1.0));
    const std::vector<double> w(n0, 0.999 * K);

    std::vector<double> diff(n0);
    for (std::size_t i = 0; i < n0; ++i)
      diff[i] = w[i] - rtn(w[i], rtn_spec);
    const double rtn_error = norm2(matvec(X, diff));

    BoundInputs in;
    in.C = C;
    in.M = 4.0 * K;
    in.K = K;
    in.p = p;
    in.n0 = n0;
    in.n1 = 1;
    in.m = 1;
    in.column_norms.assign(n0, 1.0);
    const double kap = kappa(in, OperatorKind::OneBitQuantize);

    CompressionConfig cfg;
    cfg.scaling = C;
    cfg.op = onebit_spec;
    cfg.mode = ActivationMode::Shared;

    std::vector<double> errors(trials);
    std::size_t within = 0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      RngStream rng = derive_stream(mix(seed, trial), 0, 0);
      const NeuronTrace tr = compress_neuron(w, X, X, cfg, rng);
      errors[trial] = norm2(tr.u_final);  // == ||X(w - q)||
      if (errors[trial] <= kap) ++within;
    }
    std::sort(errors.begin(), errors.end());
    const double median =
        trials % 2 == 1
            ? errors[trials / 2]
            : 0.5 * (errors[trials / 2 - 1] + errors[trials / 2]);

    RtnComparisonRow row;
    row.n0 = n0;
    row.rtn_error = rtn_error;
    row.spfc_error = median;
    row.kappa = kap;
    row.ratio = rtn_error / median;
    row.within_kappa_fraction = double(within) / double(trials);
    rows.push_back(row);
  }
  return rows;
}

SvdEquivalenceResult svd_equivalence_experiment(const DenseMatrix& X,
                                                std::span<const double> w,
                                                const CompressionConfig& cfg) {
  const SvdFactors f = svd(X);
  const DenseMatrix reduced = f.sigma_vt();

  RngStream rng_x = derive_stream(cfg.master_seed, 0, 0);
  RngStream rng_r = derive_stream(cfg.master_seed, 0, 0);
  const NeuronTrace tx = compress_neuron(w, X, X, cfg, rng_x);
  const NeuronTrace tr = compress_neuron(w, reduced, reduced, cfg, rng_r);

  SvdEquivalenceResult res;
  res.q_identical = bitwise_equal(tx.q, tr.q);

  std::vector<double> diff(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) diff[i] = w[i] - tx.q[i];
  res.error_norm_x = norm2(matvec(X, diff));
  for (std::size_t i = 0; i < w.size(); ++i) diff[i] = w[i] - tr.q[i];
  res.error_norm_reduced = norm2(matvec(reduced, diff));
  const double denom = std::max(res.error_norm_x, 1e-300);
  res.norm_rel_diff =
      std::abs(res.error_norm_x - res.error_norm_reduced) / denom;
  res.passed = res.q_identical && res.norm_rel_diff <= 1e-8;
  return res;
}

}  // namespace spfc
