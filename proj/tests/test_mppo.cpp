#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "petrirl/error.hpp"
#include "petrirl/mppo.hpp"

using namespace petrirl;

namespace {

LossBatch random_batch(int obs_size, int actions, int n, std::mt19937_64& rng,
                       const NetworkParams& params, double clip) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> ratio_draw(0.5, 1.6);
  LossBatch b;
  b.observations.resize(obs_size, n);
  b.old_log_probs.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < obs_size; ++i) b.observations(i, k) = normal(rng);
    ActionMask mask(actions, 0);
    while (std::count(mask.begin(), mask.end(), 1) == 0)
      for (auto& bit : mask) bit = rng() % 3 != 0;
    int a = static_cast<int>(rng() % actions);
    while (!mask[a]) a = static_cast<int>(rng() % actions);
    b.masks.push_back(mask);
    b.actions.push_back(a);
    // pick an old log-prob that puts the ratio away from the clip kinks
    Observation obs(obs_size);
    for (int i = 0; i < obs_size; ++i) obs[i] = b.observations(i, k);
    const double logp = std::log(masked_distribution(forward(params, obs).logits, mask)(a));
    double rho = ratio_draw(rng);
    while (std::abs(rho - (1.0 - clip)) < 0.02 || std::abs(rho - (1.0 + clip)) < 0.02)
      rho = ratio_draw(rng);
    b.old_log_probs(k) = logp - std::log(rho);
    b.advantages(k) = normal(rng);
    b.returns(k) = normal(rng);
  }
  return b;
}

LossBatch single(const NetworkParams& params, const Observation& obs, const ActionMask& mask,
                 int action, double rho, double adv) {
  LossBatch b;
  b.observations = Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
  b.masks = {mask};
  b.actions = {action};
  const double logp = std::log(masked_distribution(forward(params, obs).logits, mask)(action));
  b.old_log_probs = Eigen::VectorXd::Constant(1, logp - std::log(rho));
  b.advantages = Eigen::VectorXd::Constant(1, adv);
  b.returns = Eigen::VectorXd::Constant(1, 0.0);
  return b;
}

Transition step(double reward, double value, bool done) {
  Transition t;
  t.reward = reward;
  t.value = value;
  t.done = done;
  return t;
}

}  // namespace

TEST_CASE("zero weights give flat logits and zero value") {
  NetworkParams p = make_network(5, 4, 8, 1);
  p.actor.params().setZero();
  p.critic.params().setZero();
  const ForwardResult f = forward(p, Observation{0.3, -1, 2, 0.5, 0});
  for (int i = 1; i < 4; ++i) CHECK(f.logits(i) == f.logits(0));
  CHECK(f.value == 0.0);
}

TEST_CASE("forward is pure and checks shapes") {
  const NetworkParams p = make_network(3, 2, 16, 7);
  const Observation obs{0.1, 0.2, -1.0};
  const ForwardResult a = forward(p, obs), b = forward(p, obs);
  CHECK(a.logits == b.logits);
  CHECK(a.value == b.value);
  CHECK(p.finite());
  CHECK_THROWS_AS(forward(p, Observation{1.0}), Error);
}

TEST_CASE("orthogonal init") {
  const NetworkParams p = make_network(10, 6, 32, 3);
  const Eigen::MatrixXd w = p.actor.weight(1);  // 32 x 32 hidden layer
  const Eigen::MatrixXd gram = w.transpose() * w;
  CHECK((gram - 2.0 * Eigen::MatrixXd::Identity(32, 32)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(p.actor.bias(0).isZero());
  // small policy head keeps the initial policy close to uniform
  CHECK(p.actor.weight(2).cwiseAbs().maxCoeff() <= 0.01 + 1e-12);
}

TEST_CASE("value input-gradient matches finite differences") {
  const NetworkParams p = make_network(6, 3, 16, 11);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(6);
  for (int i = 0; i < 6; ++i) x(i) = normal(rng);
  Mlp::Cache cache;
  p.critic.forward(x, cache);
  Eigen::VectorXd unused;
  Eigen::MatrixXd gx;
  p.critic.backward(cache, Eigen::MatrixXd::Ones(1, 1), unused, &gx);
  const Eigen::VectorXd fd =
      oracle::finite_difference([&] { return p.critic.forward(x)(0, 0); }, x);
  CHECK(oracle::relative_error(gx.col(0), fd) < 1e-4);
}

TEST_CASE("masked distribution") {
  Eigen::VectorXd p = masked_distribution(Eigen::Vector2d(0, 0), ActionMask{1, 0});
  CHECK(p(0) == 1.0);
  CHECK(p(1) == 0.0);
  p = masked_distribution(Eigen::Vector3d(1, 1, 1), ActionMask{1, 1, 1});
  for (int i = 0; i < 3; ++i) CHECK(p(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  p = masked_distribution(Eigen::Vector3d(1000, -3, 2), ActionMask{0, 1, 1});
  CHECK(p(0) == 0.0);
  CHECK(std::abs(p.sum() - 1.0) < 1e-12);
  CHECK_THROWS_AS(masked_distribution(Eigen::Vector2d(0, 0), ActionMask{0, 0}), Error);
  CHECK_THROWS_AS(masked_distribution(Eigen::Vector2d(0, 0), ActionMask{1}), Error);
}

TEST_CASE("sampling never picks a masked action") {
  std::mt19937_64 rng(99);
  const ActionMask mask{0, 1, 0, 1, 1, 0};
  const Eigen::VectorXd p = masked_distribution(
      (Eigen::VectorXd(6) << 5.0, -1.0, 9.0, 0.0, 0.5, 3.0).finished(), mask);
  std::vector<int> hits(6, 0);
  for (int i = 0; i < 100000; ++i) ++hits[sample_action(p, rng)];
  CHECK(hits[0] + hits[2] + hits[5] == 0);
  CHECK(hits[4] > hits[3]);
  CHECK(argmax_action(p, mask) == 4);
}

TEST_CASE("advantage estimation") {
  GaeResult g = compute_gae({step(1.0, 0.0, true)}, 0.0, 0.99, 0.95);
  CHECK(g.advantages[0] == 1.0);
  CHECK(g.returns[0] == 1.0);

  const std::vector<Transition> traj{step(1.0, 0.5, false), step(0.2, 0.3, false),
                                     step(-0.4, 0.1, true), step(2.0, 0.7, false)};
  g = compute_gae(traj, 0.9, 0.9, 0.0);
  CHECK(g.advantages[0] == doctest::Approx(1.0 + 0.9 * 0.3 - 0.5));
  CHECK(g.advantages[1] == doctest::Approx(0.2 + 0.9 * 0.1 - 0.3));
  CHECK(g.advantages[2] == doctest::Approx(-0.4 - 0.1));
  CHECK(g.advantages[3] == doctest::Approx(2.0 + 0.9 * 0.9 - 0.7));

  std::vector<Transition> zero_v{step(1.0, 0, false), step(2.0, 0, false), step(3.0, 0, true)};
  g = compute_gae(zero_v, 0.0, 1.0, 1.0);
  CHECK(g.advantages[0] == doctest::Approx(6.0));
  CHECK(g.advantages[1] == doctest::Approx(5.0));
  CHECK(g.advantages[2] == doctest::Approx(3.0));
  for (std::size_t k = 0; k < 3; ++k) CHECK(g.returns[k] == g.advantages[k]);

  CHECK_THROWS_AS(compute_gae({}, 0.0, 0.99, 0.95), Error);
}

TEST_CASE("clipped surrogate examples") {
  const NetworkParams p = make_network(3, 3, 8, 5);
  const Observation obs{0.2, -0.4, 1.0};
  const ActionMask mask{1, 1, 1};
  LossCoefficients coef;
  coef.vf_coef = 0.0;
  coef.ent_coef = 0.0;
  LossReport r = ppo_loss(p, single(p, obs, mask, 1, 1.5, 1.0), coef, nullptr);
  CHECK(r.policy_loss == doctest::Approx(-1.2).epsilon(1e-9));
  CHECK(r.clip_fraction == 1.0);
  r = ppo_loss(p, single(p, obs, mask, 1, 0.5, -1.0), coef, nullptr);
  CHECK(r.policy_loss == doctest::Approx(0.8).epsilon(1e-9));
  r = ppo_loss(p, single(p, obs, mask, 2, 1.0, 1.0), coef, nullptr);
  CHECK(r.approx_kl == doctest::Approx(0.0));
  CHECK(r.policy_loss == doctest::Approx(-1.0));
}

TEST_CASE("analytic loss gradients match finite differences") {
  std::mt19937_64 rng(17);
  NetworkParams p = make_network(5, 4, 8, 23);
  // spread the policy head so the entropy and ratio terms are non-trivial
  p.actor.weight(2) *= 50.0;
  const LossCoefficients coef{0.2, 0.5, 0.01};
  for (int trial = 0; trial < 5; ++trial) {
    const LossBatch b = random_batch(5, 4, 3, rng, p, coef.clip_epsilon);
    LossGradients g;
    ppo_loss(p, b, coef, &g);
    const auto loss = [&] { return ppo_loss(p, b, coef, nullptr).total; };
    const Eigen::VectorXd fd_actor = oracle::finite_difference(loss, p.actor.params());
    const Eigen::VectorXd fd_critic = oracle::finite_difference(loss, p.critic.params());
    CHECK(oracle::relative_error(g.actor, fd_actor) < 1e-4);
    CHECK(oracle::relative_error(g.critic, fd_critic) < 1e-4);
  }
}

TEST_CASE("zero advantages give an exactly zero policy gradient") {
  std::mt19937_64 rng(4);
  const NetworkParams p = make_network(5, 4, 8, 2);
  LossBatch b = random_batch(5, 4, 6, rng, p, 0.2);
  b.advantages.setZero();
  LossGradients g;
  ppo_loss(p, b, LossCoefficients{0.2, 0.0, 0.0}, &g);
  CHECK(g.actor.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam first step has learning-rate magnitude") {
  Adam opt(3, 0.1);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  opt.step(x, Eigen::Vector3d(2.0, -0.5, 1e-3));
  CHECK(x(0) == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(x(1) == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(x(2) == doctest::Approx(-0.1).epsilon(1e-4));
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.gamma = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.clip_epsilon = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.minibatch_size = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("checkpoint round trip") {
  const NetworkParams p = make_network(7, 5, 12, 31);
  const NetworkParams q = params_from_json(params_to_json(p));
  CHECK(q.actor.params() == p.actor.params());
  CHECK(q.critic.params() == p.critic.params());
  CHECK(q.actor.layer_sizes() == p.actor.layer_sizes());

  const auto path = std::filesystem::temp_directory_path() / "petrirl_ckpt_test.json";
  save_params(p, path.string());
  CHECK(load_params(path.string()).actor.params() == p.actor.params());
  std::filesystem::remove(path);

  CHECK_THROWS_AS(params_from_json("{\"format\":\"other\",\"version\":1}"), Error);
  CHECK_THROWS_AS(params_from_json("not json"), Error);
  CHECK_THROWS_AS(load_params("/no/such/ckpt.json"), Error);
}

TEST_CASE("training is reproducible from the seed") {
  const Instance inst = generate_random(3, 3, 11, 13);
  TrainConfig c;
  c.total_steps = 600;
  c.rollout_length = 200;
  c.minibatch_size = 32;
  c.epochs = 2;
  c.seed = 5;
  const TrainResult a = train({inst}, {}, c);
  const TrainResult b = train({inst}, {}, c);
  REQUIRE(a.log.size() == 3);
  for (std::size_t k = 0; k < a.log.size(); ++k) {
    CHECK(a.log[k].loss == b.log[k].loss);
    CHECK(a.log[k].kl == b.log[k].kl);
    CHECK(a.log[k].ep_len == b.log[k].ep_len);
  }
  CHECK(a.params.actor.params() == b.params.actor.params());
  CHECK(metrics_to_csv(a.log).rfind("step,ep_len,ep_rew,kl,entropy,vf_loss,loss\n", 0) == 0);

  const EpisodeResult e1 = evaluate(a.params, inst, {});
  const EpisodeResult e2 = evaluate(a.params, inst, {});
  CHECK(e1.schedule == e2.schedule);
  CHECK(oracle::count_violations(e1.schedule, inst) == 0);
}

TEST_CASE("training without masking still terminates episodes") {
  const Instance inst = generate_random(3, 3, 21, 23);
  EnvConfig env;
  env.masking = false;
  TrainConfig c;
  c.total_steps = 2000;
  c.rollout_length = 500;
  c.epochs = 1;
  const TrainResult r = train({inst}, env, c);
  CHECK_FALSE(r.episode_lengths.empty());
  CHECK(r.params.finite());
}
