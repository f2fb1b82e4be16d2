#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "geotact/core/error.hpp"
#include "geotact/core/random.hpp"

namespace geotact {

// Fully connected layer, y = w x + b. Rows of `w` are output units.
struct DenseLayer {
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
};

// Multilayer perceptron with arctan on every hidden layer and a linear output.
struct Mlp {
  std::vector<DenseLayer> layers;

  Eigen::Index input_size() const { return layers.front().w.cols(); }
  Eigen::Index output_size() const { return layers.back().w.rows(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.w.size() + l.b.size());
    return n;
  }

  bool all_finite() const {
    for (const auto& l : layers) {
      if (!l.w.allFinite() || !l.b.allFinite()) return false;
    }
    return true;
  }

  friend bool operator==(const Mlp& a, const Mlp& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
      const auto& x = a.layers[i];
      const auto& y = b.layers[i];
      if (x.w.rows() != y.w.rows() || x.w.cols() != y.w.cols() || x.w != y.w || x.b != y.b) return false;
    }
    return true;
  }
};

// Scaled-uniform fan-in initialization: weights ~ U(-a, a) with
// a = gain * sqrt(3 / fan_in), so their standard deviation is gain / sqrt(fan_in).
// Biases start at zero. Weights are drawn layer by layer in row-major order.
inline Mlp make_mlp(const std::vector<int>& sizes, double hidden_gain, double output_gain, Rng& rng) {
  if (sizes.size() < 2) throw UsageError("an MLP needs at least an input and an output size");
  Mlp m;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const int fan_in = sizes[i];
    const int fan_out = sizes[i + 1];
    const double gain = i + 2 == sizes.size() ? output_gain : hidden_gain;
    const double a = gain * std::sqrt(3.0 / fan_in);
    DenseLayer l;
    l.w.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) l.w(r, c) = rng.uniform(-a, a);
    }
    l.b = Eigen::VectorXd::Zero(fan_out);
    m.layers.push_back(std::move(l));
  }
  return m;
}

// Per-layer values kept by the forward pass for backpropagation.
struct MlpTape {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each hidden layer
};

// Batched forward pass; each column of `x` is one sample.
inline Eigen::MatrixXd forward(const Mlp& m, const Eigen::MatrixXd& x, MlpTape* tape = nullptr) {
  if (x.rows() != m.input_size()) throw UsageError("MLP input has the wrong size");
  if (!x.allFinite()) throw NumericError("non-finite MLP input");
  if (tape) {
    tape->inputs.clear();
    tape->pre.clear();
  }
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const DenseLayer& l = m.layers[i];
    Eigen::MatrixXd z = l.w * h;
    z.colwise() += l.b;
    if (tape) tape->inputs.push_back(std::move(h));
    if (i + 1 == m.layers.size()) return z;
    h = z.array().atan().matrix();
    if (tape) tape->pre.push_back(std::move(z));
  }
  return h;
}

struct MlpGrad {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;

  static MlpGrad zeros_like(const Mlp& m) {
    MlpGrad g;
    for (const auto& l : m.layers) {
      g.w.push_back(Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()));
      g.b.push_back(Eigen::VectorXd::Zero(l.b.size()));
    }
    return g;
  }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& x : w) s += x.squaredNorm();
    for (const auto& x : b) s += x.squaredNorm();
    return s;
  }

  void scale(double f) {
    for (auto& x : w) x *= f;
    for (auto& x : b) x *= f;
  }
};

// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
inline void backward(const Mlp& m, const MlpTape& tape, const Eigen::MatrixXd& d_out, MlpGrad& grad) {
  Eigen::MatrixXd delta = d_out;
  for (std::size_t i = m.layers.size(); i-- > 0;) {
    grad.w[i].noalias() += delta * tape.inputs[i].transpose();
    grad.b[i] += delta.rowwise().sum();
    if (i == 0) break;
    Eigen::MatrixXd d_h = m.layers[i].w.transpose() * delta;
    const Eigen::MatrixXd& z = tape.pre[i - 1];
    delta = (d_h.array() / (1.0 + z.array().square())).matrix();
  }
}

}  // namespace geotact
