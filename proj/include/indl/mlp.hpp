#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "indl/random.hpp"

namespace indl {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <class Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
  using S = typename Derived::Scalar;
  return (S(1) + (-z).exp()).inverse();
}

/// Mean binary cross-entropy of logits z against 0/1 targets y, in the form
/// max(z,0) - y*z + log(1 + exp(-|z|)) that never overflows.
template <class DerivedZ, class DerivedY>
typename DerivedZ::Scalar bce_with_logits(const Eigen::ArrayBase<DerivedZ>& z, const Eigen::ArrayBase<DerivedY>& y) {
  using S = typename DerivedZ::Scalar;
  const auto per = z.max(S(0)) - y * z + (-z.abs()).exp().log1p();
  return per.sum() / static_cast<S>(z.size());
}

enum class Init { Zero, He };

template <class Scalar>
struct DenseLayer {
  Matrix<Scalar> weight;  // out x in
  Vector<Scalar> bias;    // out

  bool operator==(const DenseLayer& o) const {
    return weight.rows() == o.weight.rows() && weight.cols() == o.weight.cols() && weight == o.weight &&
           bias == o.bias;
  }
};

/// Fully connected network with ReLU hidden layers and one logit output.
/// Inputs are column-major batches: one sample per column.
template <class Scalar>
class Mlp {
 public:
  Mlp() = default;

  /// `depth` hidden layers of `width` units. Zero init sets every parameter
  /// to 0; He init draws hidden weights from N(0, 2/fan_in), output weights
  /// from N(0, 1/fan_in), biases 0.
  Mlp(int inputs, int depth, int width, Init init, Rng& rng) {
    int fan_in = inputs;
    for (int l = 0; l <= depth; ++l) {
      const int out = l == depth ? 1 : width;
      DenseLayer<Scalar> layer{Matrix<Scalar>::Zero(out, fan_in), Vector<Scalar>::Zero(out)};
      if (init == Init::He) {
        const Scalar scale = std::sqrt(Scalar(l == depth ? 1 : 2) / Scalar(fan_in));
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
          for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = scale * Scalar(rng.normal());
        }
      }
      layers_.push_back(std::move(layer));
      fan_in = out;
    }
  }

  int inputs() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }
  int depth() const { return static_cast<int>(layers_.size()) - 1; }

  std::vector<DenseLayer<Scalar>>& layers() { return layers_; }
  const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }

  RowVector<Scalar> logits(const Matrix<Scalar>& x) const {
    Matrix<Scalar> a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix<Scalar> z = (layers_[l].weight * a).colwise() + layers_[l].bias;
      a = l + 1 < layers_.size() ? Matrix<Scalar>(z.cwiseMax(Scalar(0))) : z;
    }
    return a.row(0);
  }

  RowVector<Scalar> scores(const Matrix<Scalar>& x) const { return sigmoid(logits(x).array()).matrix(); }

  Scalar loss(const Matrix<Scalar>& x, const RowVector<Scalar>& y) const {
    return bce_with_logits(logits(x).array(), y.array());
  }

  /// Loss and its gradient with respect to every parameter, same layout as layers().
  Scalar gradient(const Matrix<Scalar>& x, const RowVector<Scalar>& y, std::vector<DenseLayer<Scalar>>& grad) const {
    const std::size_t n_layers = layers_.size();
    std::vector<Matrix<Scalar>> acts;
    acts.reserve(n_layers + 1);
    acts.push_back(x);
    for (std::size_t l = 0; l < n_layers; ++l) {
      Matrix<Scalar> z = (layers_[l].weight * acts.back()).colwise() + layers_[l].bias;
      acts.push_back(l + 1 < n_layers ? Matrix<Scalar>(z.cwiseMax(Scalar(0))) : z);
    }
    const auto z_out = acts.back().row(0).array();
    const Scalar value = bce_with_logits(z_out, y.array());

    const Scalar batch = static_cast<Scalar>(x.cols());
    Matrix<Scalar> delta = ((sigmoid(z_out) - y.array()) / batch).matrix();
    grad.resize(n_layers);
    for (std::size_t l = n_layers; l-- > 0;) {
      grad[l].weight = delta * acts[l].transpose();
      grad[l].bias = delta.rowwise().sum();
      if (l > 0) {
        Matrix<Scalar> back = layers_[l].weight.transpose() * delta;
        delta = (acts[l].array() > Scalar(0)).select(back, Scalar(0));
      }
    }
    return value;
  }

  void sgd_step(const std::vector<DenseLayer<Scalar>>& grad, Scalar lr) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      layers_[l].weight -= lr * grad[l].weight;
      layers_[l].bias -= lr * grad[l].bias;
    }
  }

  bool operator==(const Mlp& o) const { return layers_ == o.layers_; }

 private:
  std::vector<DenseLayer<Scalar>> layers_;
};

}  // namespace indl
