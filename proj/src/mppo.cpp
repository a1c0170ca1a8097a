#include "petrirl/mppo.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "petrirl/error.hpp"

namespace petrirl {

bool NetworkParams::finite() const {
  return actor.params().allFinite() && critic.params().allFinite();
}

NetworkParams make_network(int observation_size, int num_actions, int hidden,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NetworkParams p{Mlp({observation_size, hidden, hidden, num_actions}),
                  Mlp({observation_size, hidden, hidden, 1})};
  p.actor.init_orthogonal(rng, 0.01);
  p.critic.init_orthogonal(rng, 1.0);
  return p;
}

namespace {

Eigen::VectorXd to_vector(const Observation& obs) {
  return Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
}

void check_mask(const Eigen::VectorXd& logits, const ActionMask& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != logits.size())
    throw Error(ErrorCode::shape_mismatch,
                "mask has " + std::to_string(mask.size()) + " entries for " +
                    std::to_string(logits.size()) + " logits");
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t b) { return b != 0; }))
    throw Error(ErrorCode::empty_mask, "every action is masked");
}

// log-probabilities of the masked softmax; disabled entries are -inf.
Eigen::VectorXd masked_log_softmax(const Eigen::VectorXd& logits,
                                   const ActionMask& mask) {
  check_mask(logits, mask);
  Eigen::VectorXd z(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    z(i) = mask[i] ? logits(i) : kMaskedLogit;
  const double top = z.maxCoeff();
  const double log_norm = top + std::log((z.array() - top).exp().sum());
  Eigen::VectorXd out = z.array() - log_norm;
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    if (!mask[i]) out(i) = -std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

ForwardResult forward(const NetworkParams& params, const Observation& observation) {
  const Eigen::VectorXd x = to_vector(observation);
  ForwardResult out;
  out.logits = params.actor.forward(x).col(0);
  out.value = params.critic.forward(x)(0, 0);
  return out;
}

Eigen::VectorXd masked_distribution(const Eigen::VectorXd& logits,
                                    const ActionMask& mask) {
  check_mask(logits, mask);
  Eigen::VectorXd z(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    z(i) = mask[i] ? logits(i) : kMaskedLogit;
  Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp();
  // the vectorised exp bottoms out at a denormal instead of 0
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (!mask[i]) p(i) = 0.0;
  p /= p.sum();
  return p;
}

int sample_action(const Eigen::VectorXd& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cumulative = 0.0;
  int last_positive = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs(i) <= 0.0) continue;
    last_positive = static_cast<int>(i);
    cumulative += probs(i);
    if (u < cumulative) return static_cast<int>(i);
  }
  return last_positive;
}

int argmax_action(const Eigen::VectorXd& probs, const ActionMask& mask) {
  int best = -1;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (!mask[i]) continue;
    if (best < 0 || probs(i) > probs(best)) best = static_cast<int>(i);
  }
  if (best < 0) throw Error(ErrorCode::empty_mask, "every action is masked");
  return best;
}

GaeResult compute_gae(const std::vector<Transition>& trajectory,
                      double bootstrap_value, double gamma, double lambda) {
  if (trajectory.empty())
    throw Error(ErrorCode::empty_trajectory, "no transitions to estimate from");
  const std::size_t n = trajectory.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const auto& t = trajectory[k];
    const double next_value = k + 1 < n ? trajectory[k + 1].value : bootstrap_value;
    const double live = t.done ? 0.0 : 1.0;
    const double delta = t.reward + gamma * next_value * live - t.value;
    running = delta + gamma * lambda * live * running;
    out.advantages[k] = running;
    out.returns[k] = running + t.value;
  }
  return out;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_config, what); };
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must be in (0, 1]");
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) fail("gae_lambda must be in (0, 1]");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) fail("clip_epsilon must be in (0, 1)");
  if (total_steps < 1 || rollout_length < 1 || epochs < 1 || minibatch_size < 1 ||
      hidden < 1)
    fail("sizes must be positive");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
}

LossReport ppo_loss(const NetworkParams& params, const LossBatch& batch,
                    const LossCoefficients& coef, LossGradients* grads) {
  const auto B = static_cast<Eigen::Index>(batch.actions.size());
  if (B == 0) throw Error(ErrorCode::empty_trajectory, "empty minibatch");
  if (batch.observations.cols() != B || static_cast<Eigen::Index>(batch.masks.size()) != B)
    throw Error(ErrorCode::shape_mismatch, "minibatch columns disagree");

  Mlp::Cache actor_cache, critic_cache;
  const Eigen::MatrixXd logits = params.actor.forward(batch.observations, actor_cache);
  const Eigen::MatrixXd values = params.critic.forward(batch.observations, critic_cache);

  Eigen::MatrixXd grad_logits = Eigen::MatrixXd::Zero(logits.rows(), B);
  Eigen::MatrixXd grad_values = Eigen::MatrixXd::Zero(1, B);
  LossReport r;
  const double inv_b = 1.0 / static_cast<double>(B);

  for (Eigen::Index b = 0; b < B; ++b) {
    const ActionMask& mask = batch.masks[b];
    const int action = batch.actions[b];
    const Eigen::VectorXd log_p = masked_log_softmax(logits.col(b), mask);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(log_p.size());
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (!mask[i]) continue;
      p(i) = std::exp(log_p(i));
      entropy -= p(i) * log_p(i);
    }

    const double log_ratio = log_p(action) - batch.old_log_probs(b);
    const double ratio = std::exp(log_ratio);
    const double adv = batch.advantages(b);
    const double clipped =
        std::clamp(ratio, 1.0 - coef.clip_epsilon, 1.0 + coef.clip_epsilon);
    const double unclipped_term = ratio * adv;
    const double clipped_term = clipped * adv;
    r.policy_loss -= std::min(unclipped_term, clipped_term) * inv_b;
    r.entropy += entropy * inv_b;
    r.approx_kl += ((ratio - 1.0) - log_ratio) * inv_b;
    if (std::abs(ratio - 1.0) > coef.clip_epsilon) r.clip_fraction += inv_b;

    const double diff = values(0, b) - batch.returns(b);
    r.value_loss += diff * diff * inv_b;

    if (!grads) continue;
    auto g = grad_logits.col(b);
    // d(-rho A)/dz = -A rho (onehot - p), only while the unclipped term is
    // the active branch of the min.
    if (unclipped_term <= clipped_term) {
      const double scale = -adv * ratio * inv_b;
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!mask[i]) continue;
        g(i) += scale * ((i == action ? 1.0 : 0.0) - p(i));
      }
    }
    // d(-c H)/dz_i = c p_i (log p_i + H)
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (!mask[i]) continue;
      g(i) += coef.ent_coef * p(i) * (log_p(i) + entropy) * inv_b;
    }
    grad_values(0, b) = coef.vf_coef * 2.0 * diff * inv_b;
  }
  r.total = r.policy_loss + coef.vf_coef * r.value_loss - coef.ent_coef * r.entropy;

  if (grads) {
    grads->actor = Eigen::VectorXd::Zero(params.actor.params().size());
    grads->critic = Eigen::VectorXd::Zero(params.critic.params().size());
    params.actor.backward(actor_cache, grad_logits, grads->actor);
    params.critic.backward(critic_cache, grad_values, grads->critic);
  }
  return r;
}

Adam::Adam(Eigen::Index size, double learning_rate, double beta1, double beta2,
           double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

OptimizerState make_optimizer(const NetworkParams& params, double learning_rate) {
  return {Adam(params.actor.params().size(), learning_rate),
          Adam(params.critic.params().size(), learning_rate)};
}

LossReport ppo_update(NetworkParams& params, OptimizerState& optimizer,
                      const std::vector<Transition>& batch, const GaeResult& gae,
                      const TrainConfig& config, std::mt19937_64& rng) {
  const std::size_t n = batch.size();
  if (n == 0) throw Error(ErrorCode::empty_trajectory, "empty rollout");

  Eigen::VectorXd adv = Eigen::Map<const Eigen::VectorXd>(gae.advantages.data(),
                                                         static_cast<Eigen::Index>(n));
  const double mean = adv.mean();
  const double stddev = std::sqrt((adv.array() - mean).square().mean());
  adv = (adv.array() - mean) / (stddev + 1e-8);

  const LossCoefficients coef{config.clip_epsilon, config.vf_coef, config.ent_coef};
  const int obs_size = params.observation_size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  LossReport sum;
  int minibatches = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += config.minibatch_size) {
      const std::size_t end = std::min(n, start + config.minibatch_size);
      const auto m = static_cast<Eigen::Index>(end - start);
      LossBatch mb;
      mb.observations.resize(obs_size, m);
      mb.old_log_probs.resize(m);
      mb.advantages.resize(m);
      mb.returns.resize(m);
      for (Eigen::Index k = 0; k < m; ++k) {
        const std::size_t idx = order[start + static_cast<std::size_t>(k)];
        const Transition& t = batch[idx];
        if (static_cast<int>(t.observation.size()) != obs_size)
          throw Error(ErrorCode::shape_mismatch, "observation size changed mid-run");
        mb.observations.col(k) = to_vector(t.observation);
        mb.masks.push_back(t.mask);
        mb.actions.push_back(t.action);
        mb.old_log_probs(k) = t.log_prob;
        mb.advantages(k) = adv(static_cast<Eigen::Index>(idx));
        mb.returns(k) = gae.returns[idx];
      }

      LossGradients g;
      const LossReport r = ppo_loss(params, mb, coef, &g);
      if (!std::isfinite(r.total) || !g.actor.allFinite() || !g.critic.allFinite()) {
        std::ostringstream msg;
        msg << "epoch " << epoch << ": loss " << r.total << " (policy "
            << r.policy_loss << ", value " << r.value_loss << ", entropy "
            << r.entropy << ")";
        throw Error(ErrorCode::non_finite_loss, msg.str());
      }
      const double norm = std::sqrt(g.actor.squaredNorm() + g.critic.squaredNorm());
      if (config.max_grad_norm > 0.0 && norm > config.max_grad_norm) {
        const double scale = config.max_grad_norm / (norm + 1e-12);
        g.actor *= scale;
        g.critic *= scale;
      }
      optimizer.actor.step(params.actor.params(), g.actor);
      optimizer.critic.step(params.critic.params(), g.critic);

      sum.policy_loss += r.policy_loss;
      sum.value_loss += r.value_loss;
      sum.entropy += r.entropy;
      sum.total += r.total;
      sum.approx_kl += r.approx_kl;
      sum.clip_fraction += r.clip_fraction;
      ++minibatches;
    }
  }
  const double inv = 1.0 / minibatches;
  sum.policy_loss *= inv;
  sum.value_loss *= inv;
  sum.entropy *= inv;
  sum.total *= inv;
  sum.approx_kl *= inv;
  sum.clip_fraction *= inv;
  if (!params.finite())
    throw Error(ErrorCode::non_finite_loss, "parameters left the finite range");
  return sum;
}

TrainResult train(const std::vector<Instance>& family, const EnvConfig& env_config,
                  const TrainConfig& config,
                  const std::function<void(const MetricsRow&)>& on_rollout) {
  config.validate();
  if (family.empty()) throw Error(ErrorCode::invalid_config, "empty instance family");

  std::size_t next_instance = 0;
  Environment env(family[next_instance++ % family.size()], env_config);
  const auto obs_size = static_cast<int>(env.observation_size());
  const int num_actions = env.num_actions();

  TrainResult result;
  result.params = make_network(obs_size, num_actions, config.hidden, config.seed);
  OptimizerState optimizer = make_optimizer(result.params, config.learning_rate);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  const ActionMask open_mask(num_actions, 1);
  Observation obs = env.observation();
  ActionMask mask = env.action_mask();
  int ep_len = 0;
  double ep_rew = 0.0;
  std::deque<int> recent_len;
  std::deque<double> recent_rew;

  long steps = 0;
  while (steps < config.total_steps) {
    std::vector<Transition> rollout;
    rollout.reserve(config.rollout_length);
    while (static_cast<int>(rollout.size()) < config.rollout_length &&
           steps < config.total_steps) {
      const ForwardResult f = forward(result.params, obs);
      const ActionMask& policy_mask = env_config.masking ? mask : open_mask;
      const Eigen::VectorXd probs = masked_distribution(f.logits, policy_mask);
      const int action = sample_action(probs, rng);

      StepResult sr = env.step(action);
      ++steps;
      ++ep_len;
      ep_rew += sr.reward;
      rollout.push_back({std::move(obs), policy_mask, action, std::log(probs(action)),
                         sr.reward, f.value, sr.terminated});

      if (sr.terminated) {
        result.episode_lengths.push_back(ep_len);
        result.episode_rewards.push_back(ep_rew);
        recent_len.push_back(ep_len);
        recent_rew.push_back(ep_rew);
        if (recent_len.size() > 100) {
          recent_len.pop_front();
          recent_rew.pop_front();
        }
        ep_len = 0;
        ep_rew = 0.0;
        auto [o, m] = env.reset(family[next_instance++ % family.size()], env_config);
        if (static_cast<int>(o.size()) != obs_size)
          throw Error(ErrorCode::shape_mismatch,
                      "instances in a training family must share M and capacity");
        obs = std::move(o);
        mask = std::move(m);
      } else {
        obs = std::move(sr.observation);
        mask = std::move(sr.mask);
      }
    }

    const double bootstrap =
        rollout.back().done ? 0.0 : forward(result.params, obs).value;
    const GaeResult gae =
        compute_gae(rollout, bootstrap, config.gamma, config.gae_lambda);
    const LossReport report =
        ppo_update(result.params, optimizer, rollout, gae, config, rng);

    MetricsRow row;
    row.step = steps;
    if (!recent_len.empty()) {
      row.ep_len = std::accumulate(recent_len.begin(), recent_len.end(), 0.0) /
                   static_cast<double>(recent_len.size());
      row.ep_rew = std::accumulate(recent_rew.begin(), recent_rew.end(), 0.0) /
                   static_cast<double>(recent_rew.size());
    }
    row.kl = report.approx_kl;
    row.entropy = report.entropy;
    row.vf_loss = report.value_loss;
    row.loss = report.total;
    result.log.push_back(row);
    if (on_rollout) on_rollout(row);
  }
  return result;
}

int AgentPolicy::act(const Environment& env, const ActionMask& mask) {
  const ForwardResult f = forward(params_, env.observation());
  return argmax_action(masked_distribution(f.logits, mask), mask);
}

EpisodeResult evaluate(const NetworkParams& params, const Instance& instance,
                       const EnvConfig& env_config) {
  AgentPolicy policy(params);
  return run_episode(policy, instance, env_config);
}

namespace {

nlohmann::ordered_json mlp_to_json(const Mlp& mlp) {
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (int l = 0; l < mlp.num_layers(); ++l) {
    const auto w = mlp.weight(l);
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) row_major.push_back(w(i, j));
    const auto b = mlp.bias(l);
    nlohmann::ordered_json layer;
    layer["rows"] = w.rows();
    layer["cols"] = w.cols();
    layer["activation"] = l + 1 < mlp.num_layers() ? "tanh" : "linear";
    layer["weight"] = std::move(row_major);
    layer["bias"] = std::vector<double>(b.data(), b.data() + b.size());
    layers.push_back(std::move(layer));
  }
  return layers;
}

Mlp mlp_from_json(const nlohmann::json& layers) {
  std::vector<int> sizes;
  for (const auto& layer : layers) {
    const int rows = layer.at("rows").get<int>();
    const int cols = layer.at("cols").get<int>();
    if (sizes.empty()) sizes.push_back(cols);
    if (sizes.back() != cols)
      throw Error(ErrorCode::shape_mismatch, "consecutive layer shapes disagree");
    sizes.push_back(rows);
  }
  Mlp mlp(sizes);
  int l = 0;
  for (const auto& layer : layers) {
    const auto w = layer.at("weight").get<std::vector<double>>();
    const auto b = layer.at("bias").get<std::vector<double>>();
    auto wm = mlp.weight(l);
    if (static_cast<Eigen::Index>(w.size()) != wm.size() ||
        static_cast<Eigen::Index>(b.size()) != wm.rows())
      throw Error(ErrorCode::shape_mismatch, "layer " + std::to_string(l) + " size");
    for (Eigen::Index i = 0; i < wm.rows(); ++i)
      for (Eigen::Index j = 0; j < wm.cols(); ++j)
        wm(i, j) = w[static_cast<std::size_t>(i * wm.cols() + j)];
    mlp.bias(l) = Eigen::Map<const Eigen::VectorXd>(b.data(), wm.rows());
    ++l;
  }
  return mlp;
}

}  // namespace

std::string params_to_json(const NetworkParams& params) {
  nlohmann::ordered_json doc;
  doc["format"] = "petrirl-mppo";
  doc["version"] = 1;
  doc["observation_size"] = params.observation_size();
  doc["num_actions"] = params.num_actions();
  doc["actor"] = mlp_to_json(params.actor);
  doc["critic"] = mlp_to_json(params.critic);
  return doc.dump();
}

NetworkParams params_from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format").get<std::string>() != "petrirl-mppo" ||
        doc.at("version").get<int>() != 1)
      throw Error(ErrorCode::parse_error, "unsupported checkpoint format/version");
    NetworkParams p{mlp_from_json(doc.at("actor")), mlp_from_json(doc.at("critic"))};
    if (p.critic.input_size() != p.actor.input_size() || p.critic.output_size() != 1)
      throw Error(ErrorCode::shape_mismatch, "actor/critic shapes disagree");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("checkpoint: ") + e.what());
  }
}

void save_params(const NetworkParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  out << params_to_json(params) << '\n';
}

NetworkParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return params_from_json(buffer.str());
}

std::string metrics_to_csv(const std::vector<MetricsRow>& log) {
  std::ostringstream out;
  out.precision(10);
  out << "step,ep_len,ep_rew,kl,entropy,vf_loss,loss\n";
  for (const auto& r : log)
    out << r.step << ',' << r.ep_len << ',' << r.ep_rew << ',' << r.kl << ','
        << r.entropy << ',' << r.vf_loss << ',' << r.loss << '\n';
  return out.str();
}

}  // namespace petrirl
