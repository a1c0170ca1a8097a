#include "petrirl/mlp.hpp"

#include <cmath>

#include "petrirl/error.hpp"

namespace petrirl {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2)
    throw Error(ErrorCode::invalid_config, "an MLP needs at least two layer sizes");
  Eigen::Index total = 0;
  for (int l = 0; l + 1 < static_cast<int>(sizes_.size()); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1)
      throw Error(ErrorCode::invalid_config, "layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(total);
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int layer) const {
  return {params_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(int layer) {
  return {params_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
  return {params_.data() + offsets_[layer] +
              static_cast<Eigen::Index>(sizes_[layer]) * sizes_[layer + 1],
          sizes_[layer + 1]};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(int layer) {
  return {params_.data() + offsets_[layer] +
              static_cast<Eigen::Index>(sizes_[layer]) * sizes_[layer + 1],
          sizes_[layer + 1]};
}

void Mlp::init_orthogonal(std::mt19937_64& rng, double output_gain) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int l = 0; l < num_layers(); ++l) {
    const int rows = sizes_[l + 1];
    const int cols = sizes_[l];
    const int n = std::max(rows, cols);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    // Sign fix so the draw is uniform over the orthogonal group.
    const Eigen::VectorXd d = qr.matrixQR().diagonal();
    for (int j = 0; j < n; ++j)
      if (d(j) < 0) q.col(j) *= -1.0;
    const double gain = l + 1 == num_layers() ? output_gain : std::sqrt(2.0);
    weight(l) = gain * q.topLeftCorner(rows, cols);
    bias(l).setZero();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Cache unused;
  return forward(x, unused);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache& cache) const {
  if (x.rows() != input_size())
    throw Error(ErrorCode::shape_mismatch,
                "network expects " + std::to_string(input_size()) +
                    " inputs, got " + std::to_string(x.rows()));
  cache.inputs.clear();
  Eigen::MatrixXd h = x;
  for (int l = 0; l < num_layers(); ++l) {
    cache.inputs.push_back(h);
    Eigen::MatrixXd z = weight(l) * h;
    z.colwise() += bias(l);
    if (l + 1 < num_layers())
      h = z.array().tanh().matrix();
    else
      h = std::move(z);
  }
  return h;
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                   Eigen::VectorXd& grad, Eigen::MatrixXd* grad_input) const {
  if (grad.size() != params_.size()) grad = Eigen::VectorXd::Zero(params_.size());
  Eigen::MatrixXd delta = grad_output;  // dL/dz of the current layer
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Eigen::MatrixXd& input = cache.inputs[l];
    const Eigen::Index w_size = static_cast<Eigen::Index>(sizes_[l]) * sizes_[l + 1];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + w_size, sizes_[l + 1]);
    gw.noalias() += delta * input.transpose();
    gb += delta.rowwise().sum();
    if (l == 0 && !grad_input) break;
    Eigen::MatrixXd upstream = weight(l).transpose() * delta;
    if (l > 0) {
      // input to layer l is tanh of layer l-1's pre-activation
      upstream.array() *= 1.0 - input.array().square();
      delta = std::move(upstream);
    } else {
      *grad_input = std::move(upstream);
    }
  }
}

}  // namespace petrirl
