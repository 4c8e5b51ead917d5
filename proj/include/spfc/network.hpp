#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spfc/matrix.hpp"

namespace spfc {

enum class Activation { Relu, Identity };

Activation activation_from_string(std::string_view name);
std::string to_string(Activation a);

// Bias-free multilayer perceptron. Data convention: rows of X are data
// points, layer i maps m x N_{i-1} activations to m x N_i via X * W^(i).
struct MlpModel {
  std::vector<DenseMatrix> layers;  // W^(i): N_{i-1} x N_i
  Activation activation = Activation::Relu;
  double weight_bound = 1.0;  // K

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t num_layers() const noexcept { return layers.size(); }

  // Checks the layer dimension chain; with strict_bound also max|W| < K.
  void validate(bool strict_bound = false) const;
};

struct ActivationStack {
  std::vector<DenseMatrix> x;  // x[0] = input, x[i] = Phi^(i)(input), i <= L
};

ActivationStack forward(const MlpModel& net, const DenseMatrix& X);

// Entries i.i.d. uniform on (-K, K), drawn from derive_stream(seed, layer, 0).
MlpModel init_random_mlp(const std::vector<std::size_t>& dims, double K,
                         std::uint64_t seed);

// Manifest JSON {version, activation, K, layers: [file names]} with MAT1
// matrices stored next to it; round-trip is bitwise exact.
void save_model(const MlpModel& net, const std::string& manifest_path);
MlpModel load_model(const std::string& manifest_path);

// Synthetic calibration data, rows i.i.d.; pure function of its arguments.
enum class DataDistribution { Uniform, Gaussian };  // uniform(-1,1) / N(0,1)
DataDistribution distribution_from_string(std::string_view name);
DenseMatrix synthetic_data(std::size_t m, std::size_t dim,
                           DataDistribution dist, std::uint64_t seed);

}  // namespace spfc
