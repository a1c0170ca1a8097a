#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "petrirl/environment.hpp"
#include "petrirl/mlp.hpp"
#include "petrirl/policies.hpp"

namespace petrirl {

// Logit assigned to disabled actions before the softmax.
inline constexpr double kMaskedLogit = -1e9;

// Separate actor (observation -> logits) and critic (observation -> value).
struct NetworkParams {
  Mlp actor;
  Mlp critic;

  int observation_size() const { return actor.input_size(); }
  int num_actions() const { return actor.output_size(); }
  bool finite() const;
};

NetworkParams make_network(int observation_size, int num_actions, int hidden,
                           std::uint64_t seed);

struct ForwardResult {
  Eigen::VectorXd logits;
  double value = 0.0;
};

ForwardResult forward(const NetworkParams& params, const Observation& observation);

// Softmax over enabled entries; disabled entries come out exactly 0.
Eigen::VectorXd masked_distribution(const Eigen::VectorXd& logits,
                                    const ActionMask& mask);

int sample_action(const Eigen::VectorXd& probs, std::mt19937_64& rng);
int argmax_action(const Eigen::VectorXd& probs, const ActionMask& mask);

struct Transition {
  Observation observation;
  ActionMask mask;
  int action = 0;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;  // episode ended after this step
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t, with V past the end
// given by `bootstrap_value`; A_t accumulates (gamma * lambda)^k delta_{t+k}
// within an episode; R_t = A_t + V_t.
GaeResult compute_gae(const std::vector<Transition>& trajectory,
                      double bootstrap_value, double gamma, double lambda);

struct TrainConfig {
  long total_steps = 100000;
  int rollout_length = 2048;
  int epochs = 10;
  int minibatch_size = 64;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double vf_coef = 0.5;
  double ent_coef = 0.01;
  double learning_rate = 3e-4;
  double max_grad_norm = 0.5;
  int hidden = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

// Minibatch in column layout: one column per sample.
struct LossBatch {
  Eigen::MatrixXd observations;
  std::vector<ActionMask> masks;
  std::vector<int> actions;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;  // already normalised
  Eigen::VectorXd returns;
};

struct LossCoefficients {
  double clip_epsilon = 0.2;
  double vf_coef = 0.5;
  double ent_coef = 0.01;
};

struct LossReport {
  double policy_loss = 0.0;  // -mean(min(rho A, clip(rho) A))
  double value_loss = 0.0;   // mean((V - R)^2)
  double entropy = 0.0;      // mean policy entropy over enabled actions
  double total = 0.0;        // policy_loss + vf_coef * value_loss - ent_coef * entropy
  double approx_kl = 0.0;    // mean((rho - 1) - log rho)
  double clip_fraction = 0.0;
};

struct LossGradients {
  Eigen::VectorXd actor;
  Eigen::VectorXd critic;
};

// Evaluates the PPO loss; fills analytic gradients of `total` when `grads`
// is non-null.
LossReport ppo_loss(const NetworkParams& params, const LossBatch& batch,
                    const LossCoefficients& coef, LossGradients* grads);

// First-order adaptive-moment optimizer with bias correction.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index size, double learning_rate, double beta1 = 0.9,
       double beta2 = 0.999, double epsilon = 1e-8);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_ = 3e-4, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

struct OptimizerState {
  Adam actor;
  Adam critic;
};

OptimizerState make_optimizer(const NetworkParams& params, double learning_rate);

// One PPO update over a rollout: advantages are normalised over the whole
// batch, then `epochs` passes of shuffled minibatches. Throws non_finite_loss
// (parameters untouched by the failing minibatch) if a loss or gradient is
// not finite. The report averages the minibatch reports.
LossReport ppo_update(NetworkParams& params, OptimizerState& optimizer,
                      const std::vector<Transition>& batch, const GaeResult& gae,
                      const TrainConfig& config, std::mt19937_64& rng);

struct MetricsRow {
  long step = 0;
  double ep_len = 0.0;  // mean over the last 100 finished episodes
  double ep_rew = 0.0;
  double kl = 0.0;
  double entropy = 0.0;
  double vf_loss = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  NetworkParams params;
  std::vector<MetricsRow> log;
  std::vector<int> episode_lengths;  // every finished episode, in order
  std::vector<double> episode_rewards;
};

// Trains on the instance family (episodes cycle through it). When the
// environment runs with masking disabled the policy samples over every
// action and disabled picks become no-op steps.
TrainResult train(const std::vector<Instance>& family, const EnvConfig& env_config,
                  const TrainConfig& config,
                  const std::function<void(const MetricsRow&)>& on_rollout = {});

// Greedy rollout (argmax over the masked distribution).
EpisodeResult evaluate(const NetworkParams& params, const Instance& instance,
                       const EnvConfig& env_config);

class AgentPolicy final : public Policy {
 public:
  explicit AgentPolicy(NetworkParams params) : params_(std::move(params)) {}
  int act(const Environment& env, const ActionMask& mask) override;
  std::string name() const override { return "AGENT"; }

 private:
  NetworkParams params_;
};

// Checkpoints: JSON with layer shapes and row-major weights.
std::string params_to_json(const NetworkParams& params);
NetworkParams params_from_json(const std::string& text);
void save_params(const NetworkParams& params, const std::string& path);
NetworkParams load_params(const std::string& path);

std::string metrics_to_csv(const std::vector<MetricsRow>& log);

}  // namespace petrirl
