#include "spfc/network.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "spfc/error.hpp"
#include "spfc/rng.hpp"

namespace spfc {

using nlohmann::json;

Activation activation_from_string(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "identity") return Activation::Identity;
  throw Error("model: unknown activation '" + std::string(name) + "'");
}

std::string to_string(Activation a) {
  return a == Activation::Relu ? "relu" : "identity";
}

std::size_t MlpModel::input_dim() const {
  if (layers.empty()) throw Error("model: no layers");
  return layers.front().rows();
}

std::size_t MlpModel::output_dim() const {
  if (layers.empty()) throw Error("model: no layers");
  return layers.back().cols();
}

void MlpModel::validate(bool strict_bound) const {
  if (layers.empty()) throw Error("model: no layers");
  if (!(weight_bound > 0.0))
    throw Error("model: weight bound K must be positive");
  for (std::size_t i = 0; i + 1 < layers.size(); ++i)
    if (layers[i].cols() != layers[i + 1].rows())
      throw Error("model: dimension chain broken at layer " +
                  std::to_string(i) + ": " + layers[i].shape_string() +
                  " then " + layers[i + 1].shape_string());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!layers[i].all_finite())
      throw Error("model: non-finite weight in layer " + std::to_string(i));
    if (strict_bound)
      for (double w : layers[i].data())
        if (!(std::abs(w) < weight_bound))
          throw Error("model: weight bound violated in layer " +
                      std::to_string(i));
  }
}

namespace {

DenseMatrix apply_activation(DenseMatrix m, Activation a) {
  return a == Activation::Relu ? relu(m) : m;
}

}  // namespace

ActivationStack forward(const MlpModel& net, const DenseMatrix& X) {
  net.validate();
  if (X.cols() != net.input_dim())
    throw Error("forward: data has " + std::to_string(X.cols()) +
                " columns, model expects " + std::to_string(net.input_dim()));
  ActivationStack stack;
  stack.x.reserve(net.layers.size() + 1);
  stack.x.push_back(X);
  for (const auto& w : net.layers)
    stack.x.push_back(apply_activation(matmul(stack.x.back(), w), net.activation));
  return stack;
}

MlpModel init_random_mlp(const std::vector<std::size_t>& dims, double K,
                         std::uint64_t seed) {
  if (dims.size() < 2) throw Error("model: need at least two dims");
  if (!(K > 0.0)) throw Error("model: K must be positive");
  MlpModel net;
  net.weight_bound = K;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseMatrix w(dims[l], dims[l + 1]);
    RngStream rng = derive_stream(seed, l, 0);
    for (double& e : w.data()) {
      double u;
      do {
        u = rng.next_double();
      } while (u == 0.0);  // keep the bound strict: (2u-1)K in (-K, K)
      e = (2.0 * u - 1.0) * K;
    }
    net.layers.push_back(std::move(w));
  }
  return net;
}

void save_model(const MlpModel& net, const std::string& manifest_path) {
  net.validate();
  const auto dir = std::filesystem::path(manifest_path).parent_path();
  json manifest;
  manifest["version"] = 1;
  manifest["activation"] = to_string(net.activation);
  manifest["K"] = net.weight_bound;
  json names = json::array();
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "layer_%03zu.mat", i);
    save_mat1(net.layers[i], (dir / name).string());
    names.push_back(name);
  }
  manifest["layers"] = names;
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw Error("model: cannot write manifest: " + manifest_path);
  out << manifest.dump(2) << "\n";
}

MlpModel load_model(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error("model: cannot open manifest: " + manifest_path);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw Error("model: manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!manifest.is_object()) throw Error("model: manifest must be an object");
  if (!manifest.contains("version") || manifest["version"] != 1)
    throw Error("model: manifest version missing or unsupported");
  if (!manifest.contains("activation") || !manifest["activation"].is_string())
    throw Error("model: manifest field 'activation' missing or not a string");
  if (!manifest.contains("K") || !manifest["K"].is_number())
    throw Error("model: manifest field 'K' missing or not a number");
  if (!manifest.contains("layers") || !manifest["layers"].is_array() ||
      manifest["layers"].empty())
    throw Error("model: manifest field 'layers' missing or empty");

  MlpModel net;
  net.activation =
      activation_from_string(manifest["activation"].get<std::string>());
  net.weight_bound = manifest["K"].get<double>();
  const auto dir = std::filesystem::path(manifest_path).parent_path();
  for (const auto& entry : manifest["layers"]) {
    if (!entry.is_string())
      throw Error("model: manifest layer names must be strings");
    net.layers.push_back(
        load_mat1((dir / entry.get<std::string>()).string()));
  }
  net.validate();
  return net;
}

DataDistribution distribution_from_string(std::string_view name) {
  if (name == "uniform") return DataDistribution::Uniform;
  if (name == "gaussian") return DataDistribution::Gaussian;
  throw Error("data: unknown distribution '" + std::string(name) + "'");
}

DenseMatrix synthetic_data(std::size_t m, std::size_t dim,
                           DataDistribution dist, std::uint64_t seed) {
  if (m == 0 || dim == 0) throw Error("data: dimensions must be positive");
  DenseMatrix x(m, dim);
  RngStream rng = derive_stream(seed, 0xda7aULL, 0);
  if (dist == DataDistribution::Uniform) {
    for (double& e : x.data()) e = 2.0 * rng.next_double() - 1.0;
  } else {
    // Box-Muller; u1 shifted away from 0 so log stays finite
    auto data = x.data();
    for (std::size_t i = 0; i < data.size(); i += 2) {
      const double u1 = 1.0 - rng.next_double();
      const double u2 = rng.next_double();
      const double r = std::sqrt(-2.0 * std::log(u1));
      data[i] = r * std::cos(2.0 * M_PI * u2);
      if (i + 1 < data.size()) data[i + 1] = r * std::sin(2.0 * M_PI * u2);
    }
  }
  return x;
}

}  // namespace spfc
