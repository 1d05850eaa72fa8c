#pragma once

// Precision-templated forward/backward passes shared by the network code.

#include <vector>

#include <Eigen/Core>

#include "collapse/mlp.hpp"

namespace collapse::detail {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Col = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
struct CastMlp {
  std::vector<Mat<T>> weights;
  std::vector<Col<T>> biases;
  Activation activation;

  explicit CastMlp(const Mlp& net) : activation(net.activation) {
    weights.reserve(net.weights.size());
    biases.reserve(net.biases.size());
    for (const auto& w : net.weights) weights.push_back(w.cast<T>());
    for (const auto& b : net.biases) biases.push_back(b.cast<T>());
  }
};

/// tape[l] holds the input of layer l (tape[0] is the network input).
template <typename T>
Mat<T> mlp_forward(const CastMlp<T>& net, Mat<T> input, std::vector<Mat<T>>* tape) {
  const auto layers = net.weights.size();
  if (tape) {
    tape->clear();
    tape->reserve(layers);
  }
  Mat<T> a = std::move(input);
  for (std::size_t l = 0; l < layers; ++l) {
    Mat<T> z(net.weights[l].rows(), a.cols());
    z.noalias() = net.weights[l] * a;
    z.colwise() += net.biases[l];
    if (l + 1 < layers) {
      if (net.activation == Activation::Tanh) {
        z = z.array().tanh().matrix();
      } else {
        z = z.cwiseMax(T(0));
      }
    }
    if (tape) {
      tape->push_back(std::move(a));
    }
    a = std::move(z);
  }
  return a;
}

/// Accumulates parameter gradients into `grads` (double storage) given
/// d loss / d output. Returns d loss / d input when `want_input` is set.
template <typename T>
Mat<T> mlp_backward(const CastMlp<T>& net, const std::vector<Mat<T>>& tape, Mat<T> grad_out,
                    Mlp& grads, bool want_input) {
  const auto layers = net.weights.size();
  Mat<T> g = std::move(grad_out);
  for (std::size_t idx = layers; idx-- > 0;) {
    const Mat<T>& a = tape[idx];
    Mat<T> dw(net.weights[idx].rows(), net.weights[idx].cols());
    dw.noalias() = g * a.transpose();
    grads.weights[idx] += dw.template cast<double>();
    grads.biases[idx] += g.rowwise().sum().template cast<double>();
    if (idx == 0 && !want_input) break;
    Mat<T> prev(net.weights[idx].cols(), g.cols());
    prev.noalias() = net.weights[idx].transpose() * g;
    if (idx > 0) {
      if (net.activation == Activation::Tanh) {
        prev.array() *= (T(1) - a.array().square());
      } else {
        prev.array() *= (a.array() > T(0)).template cast<T>();
      }
    }
    g = std::move(prev);
  }
  return g;
}

}  // namespace collapse::detail
