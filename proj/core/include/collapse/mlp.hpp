#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "collapse/rng.hpp"

namespace collapse {

enum class Activation { Tanh, ReLU };

/// Arithmetic used for forward/backward passes. Parameters are always stored
/// in double; Float32 casts them per call, which roughly doubles GEMM
/// throughput for the wide networks.
enum class Precision { Float32, Float64 };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation act);
Precision precision_from_name(const std::string& name);
std::string precision_name(Precision p);

/// Fully connected network: affine layers with `activation` between them and
/// a linear output layer. widths = {in, hidden..., out}.
struct Mlp {
  std::vector<int> widths;
  Activation activation = Activation::Tanh;
  std::vector<Eigen::MatrixXd> weights;  ///< layer l: widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> biases;

  /// Entries drawn U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static Mlp init(std::vector<int> widths, Activation activation, Seed seed);
  static Mlp zeros(std::vector<int> widths, Activation activation);

  [[nodiscard]] int layers() const { return static_cast<int>(weights.size()); }
  [[nodiscard]] int input_dim() const { return widths.front(); }
  [[nodiscard]] int output_dim() const { return widths.back(); }
  [[nodiscard]] std::size_t parameter_count() const;

  /// Same shape, all entries zero.
  [[nodiscard]] Mlp zeros_like() const;

  /// Throws ParameterError if shapes disagree with `widths` or entries are non-finite.
  void validate() const;

  void append_parameters(std::vector<std::span<double>>& out);
  void append_parameters(std::vector<std::span<const double>>& out) const;

  /// Column-batched evaluation: input is in x B, returns out x B.
  [[nodiscard]] Eigen::MatrixXd forward(const Eigen::MatrixXd& input,
                                        Precision precision = Precision::Float64) const;
};

}  // namespace collapse
