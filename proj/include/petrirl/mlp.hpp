#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

namespace petrirl {

// Fully connected network with tanh hidden layers and a linear output layer.
// All weights and biases live in one flat vector so optimizers and gradient
// checks can treat them uniformly. Layer l owns a (out x in) column-major
// weight block followed by its bias.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // input to every layer
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);

  // Orthogonal init: hidden layers with gain sqrt(2), output layer with
  // `output_gain`; biases zero.
  void init_orthogonal(std::mt19937_64& rng, double output_gain);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);

  // Columns of `x` are samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache& cache) const;

  // Accumulates dL/dparams into `grad` (same layout as params()) given
  // dL/doutput; optionally returns dL/dinput.
  void backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                Eigen::VectorXd& grad, Eigen::MatrixXd* grad_input = nullptr) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;  // start of each layer's weight block
  Eigen::VectorXd params_;
};

}  // namespace petrirl
