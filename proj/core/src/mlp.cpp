#include "collapse/mlp.hpp"

#include <cmath>

#include <fmt/format.h>

#include "collapse/error.hpp"
#include "mlp_kernels.hpp"

namespace collapse {

Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::ReLU;
  throw ParameterError(fmt::format("unknown activation '{}' (expected tanh or relu)", name));
}

std::string activation_name(Activation act) { return act == Activation::Tanh ? "tanh" : "relu"; }

Precision precision_from_name(const std::string& name) {
  if (name == "float32") return Precision::Float32;
  if (name == "float64") return Precision::Float64;
  throw ParameterError(fmt::format("unknown precision '{}' (expected float32 or float64)", name));
}

std::string precision_name(Precision p) { return p == Precision::Float32 ? "float32" : "float64"; }

namespace {

void check_widths(const std::vector<int>& widths) {
  if (widths.size() < 2) throw ParameterError("network needs at least input and output widths");
  for (int w : widths) {
    if (w < 1) throw ParameterError(fmt::format("layer width {} must be >= 1", w));
  }
}

}  // namespace

Mlp Mlp::zeros(std::vector<int> widths, Activation activation) {
  check_widths(widths);
  Mlp net;
  net.activation = activation;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    net.weights.push_back(Eigen::MatrixXd::Zero(widths[l + 1], widths[l]));
    net.biases.push_back(Eigen::VectorXd::Zero(widths[l + 1]));
  }
  net.widths = std::move(widths);
  return net;
}

Mlp Mlp::init(std::vector<int> widths, Activation activation, Seed seed) {
  Mlp net = zeros(std::move(widths), activation);
  for (int l = 0; l < net.layers(); ++l) {
    Rng rng(seed.child(static_cast<std::uint64_t>(l)));
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.widths[l]));
    auto& w = net.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) net.biases[l][i] = rng.uniform(-bound, bound);
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (int l = 0; l < layers(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

Mlp Mlp::zeros_like() const { return zeros(widths, activation); }

void Mlp::validate() const {
  check_widths(widths);
  if (weights.size() + 1 != widths.size() || biases.size() != weights.size()) {
    throw ParameterError("network layer count disagrees with widths");
  }
  for (int l = 0; l < layers(); ++l) {
    if (weights[l].rows() != widths[l + 1] || weights[l].cols() != widths[l] ||
        biases[l].size() != widths[l + 1]) {
      throw ParameterError(fmt::format("layer {} shape disagrees with widths", l));
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw ParameterError(fmt::format("layer {} has non-finite parameters", l));
    }
  }
}

void Mlp::append_parameters(std::vector<std::span<double>>& out) {
  for (int l = 0; l < layers(); ++l) {
    out.emplace_back(weights[l].data(), static_cast<std::size_t>(weights[l].size()));
    out.emplace_back(biases[l].data(), static_cast<std::size_t>(biases[l].size()));
  }
}

void Mlp::append_parameters(std::vector<std::span<const double>>& out) const {
  for (int l = 0; l < layers(); ++l) {
    out.emplace_back(weights[l].data(), static_cast<std::size_t>(weights[l].size()));
    out.emplace_back(biases[l].data(), static_cast<std::size_t>(biases[l].size()));
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Precision precision) const {
  if (input.rows() != input_dim()) {
    throw ParameterError(
        fmt::format("network expects {} inputs, got {}", input_dim(), input.rows()));
  }
  if (precision == Precision::Float32) {
    detail::CastMlp<float> net(*this);
    return detail::mlp_forward<float>(net, input.cast<float>(), nullptr).cast<double>();
  }
  detail::CastMlp<double> net(*this);
  return detail::mlp_forward<double>(net, input, nullptr);
}

}  // namespace collapse
