#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "spfc/matrix.hpp"
#include "spfc/network.hpp"
#include "spfc/operators.hpp"
#include "spfc/rng.hpp"

namespace spfc {

// Whether the error-correction term uses activations of the compressed
// network (paired, the multi-layer setting) or of the original network
// (shared, the single-layer setting where Xt == X).
enum class ActivationMode { Paired, Shared };

ActivationMode activation_mode_from_string(std::string_view name);
std::string to_string(ActivationMode mode);

struct CompressionConfig {
  double scaling = 1.0;  // C >= 1; divides the error-correction term
  OperatorSpec op;
  std::uint64_t master_seed = 0;
  ActivationMode mode = ActivationMode::Shared;
  double zero_column_tol = 1e-24;  // ||Xt_t||^2 at or below this: v_t = w_t
  bool retain_traces = false;
  std::size_t threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

// Per-neuron record of one run of the sequential compression loop.
struct NeuronTrace {
  std::vector<double> q;           // compressed weights, length N
  std::vector<double> v;           // operator arguments v_t
  std::vector<double> u_norm_inf;  // ||u_t||_inf after each step
  std::vector<double> u_final;     // accumulated error u_N, length m
  std::size_t saturation_events = 0;  // steps with |v_t - w_t| > K
  bool weight_bound_exceeded = false; // some |w_t| >= K (warning, not an error)
};

// Sequential per-weight compression with error feedback: for t = 1..N,
//   h_t = C w_t X_t + u_{t-1}
//   v_t = <h_t, Xt_t> / (C ||Xt_t||^2)
//   q_t = T(v_t)
//   u_t = u_{t-1} + w_t X_t - q_t Xt_t
// v_t is evaluated as w_t <X_t,Xt_t>/||Xt_t||^2 + <u_{t-1},Xt_t>/(C||Xt_t||^2),
// which is the same expression regrouped so that the identity operator with
// Xt == X is an exact fixed point (q == w, u_t == 0 bitwise).
NeuronTrace compress_neuron(std::span<const double> w, const DenseMatrix& X,
                            const DenseMatrix& Xt,
                            const CompressionConfig& cfg, RngStream& rng);

struct LayerResult {
  DenseMatrix q;  // compressed weights, same dims as W
  std::vector<double> final_u_inf;             // per neuron
  std::vector<std::size_t> saturation_events;  // per neuron
  std::vector<NeuronTrace> traces;  // filled only when cfg.retain_traces
  bool weight_bound_exceeded = false;
};

// Compresses every column of W independently; column j draws from
// derive_stream(master_seed, layer_index, j), so the result is bitwise
// independent of the thread count.
LayerResult compress_layer(const DenseMatrix& W, const DenseMatrix& X,
                           const DenseMatrix& Xt, const CompressionConfig& cfg,
                           std::size_t layer_index);

struct NetworkResult {
  MlpModel compressed;
  std::vector<LayerResult> layers;
};

// Algorithm on the whole network: layer i is compressed against the original
// activations X^(i-1) and (in paired mode) the compressed-network activations
// Xt^(i-1); both stacks are advanced incrementally after each layer.
NetworkResult compress_network(const MlpModel& net, const DenseMatrix& X,
                               const CompressionConfig& cfg);

// Diagnostics for a compressed layer: errors of X*W vs Xt*Q before and after
// the activation, zero fraction, and (for discrete alphabets) value counts.
struct LayerStats {
  double max_abs_error_pre = 0.0;
  double max_abs_error_post = 0.0;
  double sparsity_fraction = 0.0;
  std::map<double, std::size_t> support_histogram;
};

LayerStats layer_stats(const DenseMatrix& W, const DenseMatrix& X,
                       const DenseMatrix& Xt, const DenseMatrix& Q,
                       Activation act, const OperatorSpec& op);

}  // namespace spfc
