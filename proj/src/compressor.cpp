#include "spfc/compressor.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "spfc/error.hpp"

namespace spfc {

ActivationMode activation_mode_from_string(std::string_view name) {
  if (name == "paired") return ActivationMode::Paired;
  if (name == "shared") return ActivationMode::Shared;
  throw Error("config: unknown activation mode '" + std::string(name) + "'");
}

std::string to_string(ActivationMode mode) {
  return mode == ActivationMode::Paired ? "paired" : "shared";
}

void CompressionConfig::validate() const {
  if (!(scaling >= 1.0) || !std::isfinite(scaling))
    throw Error("config: C must be >= 1, got " + std::to_string(scaling));
  if (!(zero_column_tol >= 0.0))
    throw Error("config: zero_column_tol must be nonnegative");
  op.validate();
}

NeuronTrace compress_neuron(std::span<const double> w, const DenseMatrix& X,
                            const DenseMatrix& Xt,
                            const CompressionConfig& cfg, RngStream& rng) {
  cfg.validate();
  const std::size_t n = w.size(), m = X.rows();
  if (X.cols() != n || Xt.cols() != n || Xt.rows() != m)
    throw Error("compress_neuron: dimension mismatch, w has length " +
                std::to_string(n) + ", X is " + X.shape_string() +
                ", Xt is " + Xt.shape_string());

  const double C = cfg.scaling;
  const double K = cfg.op.K;
  NeuronTrace tr;
  tr.q.resize(n);
  tr.v.resize(n);
  tr.u_norm_inf.resize(n);
  std::vector<double> u(m, 0.0);

  for (std::size_t t = 0; t < n; ++t) {
    double xt_n2 = 0.0, x_dot_xt = 0.0, u_dot_xt = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double xe = X(i, t);
      const double xte = Xt(i, t);
      xt_n2 += xte * xte;
      x_dot_xt += xe * xte;
      u_dot_xt += u[i] * xte;
    }
    double v;
    if (xt_n2 <= cfg.zero_column_tol) {
      v = w[t];  // dead column contributes nothing; round the raw weight
    } else {
      v = w[t] * (x_dot_xt / xt_n2) + u_dot_xt / (C * xt_n2);
    }
    if (!std::isfinite(v))
      throw Error("compress_neuron: non-finite v at step " +
                  std::to_string(t + 1));
    const double q = apply_operator(v, cfg.op, rng);
    double u_inf = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      u[i] += w[t] * X(i, t) - q * Xt(i, t);
      u_inf = std::max(u_inf, std::abs(u[i]));
    }
    if (!std::isfinite(u_inf))
      throw Error("compress_neuron: non-finite accumulated error at step " +
                  std::to_string(t + 1));
    tr.v[t] = v;
    tr.q[t] = q;
    tr.u_norm_inf[t] = u_inf;
    if (std::abs(v - w[t]) > K) ++tr.saturation_events;
    if (std::abs(w[t]) >= K) tr.weight_bound_exceeded = true;
  }
  tr.u_final = std::move(u);
  return tr;
}

LayerResult compress_layer(const DenseMatrix& W, const DenseMatrix& X,
                           const DenseMatrix& Xt, const CompressionConfig& cfg,
                           std::size_t layer_index) {
  cfg.validate();
  if (X.cols() != W.rows())
    throw Error("compress_layer: X is " + X.shape_string() + " but W is " +
                W.shape_string());
  if (Xt.cols() != W.rows() || Xt.rows() != X.rows())
    throw Error("compress_layer: Xt is " + Xt.shape_string() +
                ", expected " + X.shape_string());

  const std::size_t n1 = W.cols();
  LayerResult res;
  res.q = DenseMatrix(W.rows(), n1);
  res.final_u_inf.assign(n1, 0.0);
  res.saturation_events.assign(n1, 0);
  if (cfg.retain_traces) res.traces.resize(n1);
  std::vector<unsigned char> bound_flags(n1, 0);

  auto run_column = [&](std::size_t j) {
    const std::vector<double> w = column(W, j);
    RngStream rng = derive_stream(cfg.master_seed, layer_index, j);
    NeuronTrace tr = compress_neuron(w, X, Xt, cfg, rng);
    for (std::size_t i = 0; i < W.rows(); ++i) res.q(i, j) = tr.q[i];
    res.final_u_inf[j] = tr.u_norm_inf.empty() ? 0.0 : tr.u_norm_inf.back();
    res.saturation_events[j] = tr.saturation_events;
    bound_flags[j] = tr.weight_bound_exceeded ? 1 : 0;
    if (cfg.retain_traces) res.traces[j] = std::move(tr);
  };

  std::size_t threads = cfg.threads == 0
                            ? std::max(1u, std::thread::hardware_concurrency())
                            : cfg.threads;
  threads = std::min(threads, n1);
  if (threads <= 1) {
    for (std::size_t j = 0; j < n1; ++j) run_column(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n1);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t j = next.fetch_add(1);
          if (j >= n1) return;
          try {
            run_column(j);
          } catch (...) {
            errors[j] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  for (unsigned char f : bound_flags) res.weight_bound_exceeded |= (f != 0);
  return res;
}

namespace {

DenseMatrix apply_activation(DenseMatrix m, Activation a) {
  return a == Activation::Relu ? relu(m) : m;
}

}  // namespace

NetworkResult compress_network(const MlpModel& net, const DenseMatrix& X,
                               const CompressionConfig& cfg) {
  net.validate();
  cfg.validate();
  if (X.cols() != net.input_dim())
    throw Error("compress_network: data has " + std::to_string(X.cols()) +
                " columns, model expects " + std::to_string(net.input_dim()));

  NetworkResult out;
  out.compressed = net;
  DenseMatrix x_orig = X;   // activations of the original network
  DenseMatrix x_comp = X;   // activations of the compressed-so-far network
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const DenseMatrix& xt =
        cfg.mode == ActivationMode::Shared ? x_orig : x_comp;
    LayerResult lr = compress_layer(net.layers[i], x_orig, xt, cfg, i);
    out.compressed.layers[i] = lr.q;
    out.layers.push_back(std::move(lr));
    x_orig = apply_activation(matmul(x_orig, net.layers[i]), net.activation);
    x_comp = apply_activation(matmul(x_comp, out.compressed.layers[i]),
                              net.activation);
  }
  return out;
}

LayerStats layer_stats(const DenseMatrix& W, const DenseMatrix& X,
                       const DenseMatrix& Xt, const DenseMatrix& Q,
                       Activation act, const OperatorSpec& op) {
  LayerStats st;
  const DenseMatrix ref = matmul(X, W);
  const DenseMatrix got = matmul(Xt, Q);
  for (std::size_t i = 0; i < ref.data().size(); ++i)
    st.max_abs_error_pre =
        std::max(st.max_abs_error_pre, std::abs(ref.data()[i] - got.data()[i]));
  const DenseMatrix ref_a = act == Activation::Relu ? relu(ref) : ref;
  const DenseMatrix got_a = act == Activation::Relu ? relu(got) : got;
  for (std::size_t i = 0; i < ref_a.data().size(); ++i)
    st.max_abs_error_post = std::max(
        st.max_abs_error_post, std::abs(ref_a.data()[i] - got_a.data()[i]));

  std::size_t zeros = 0;
  const bool discrete = op.kind == OperatorKind::OneBitQuantize ||
                        op.kind == OperatorKind::QuantizePrune ||
                        op.kind == OperatorKind::RtnOneBit;
  for (double q : Q.data()) {
    if (q == 0.0) ++zeros;
    if (discrete) ++st.support_histogram[q];
  }
  st.sparsity_fraction = double(zeros) / double(Q.data().size());
  return st;
}

}  // namespace spfc
