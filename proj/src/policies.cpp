#include "petrirl/policies.hpp"

#include <algorithm>
#include <cctype>

#include "petrirl/error.hpp"

namespace petrirl {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::SPT: return "SPT";
    case PolicyKind::LPT: return "LPT";
    case PolicyKind::SPS: return "SPS";
    case PolicyKind::LPS: return "LPS";
    case PolicyKind::SSO: return "SSO";
    case PolicyKind::LSO: return "LSO";
    case PolicyKind::RANDOM: return "RANDOM";
    case PolicyKind::AGENT: return "AGENT";
  }
  return "?";
}

PolicyKind parse_policy(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (auto kind : {PolicyKind::SPT, PolicyKind::LPT, PolicyKind::SPS,
                    PolicyKind::LPS, PolicyKind::SSO, PolicyKind::LSO,
                    PolicyKind::RANDOM, PolicyKind::AGENT}) {
    if (upper == to_string(kind)) return kind;
  }
  throw Error(ErrorCode::invalid_config, "unknown policy '" + std::string(name) + "'");
}

int decide(PolicyKind kind, std::span<const JobFeatures> jobs,
           const ActionMask& mask, Rng* rng) {
  std::vector<int> enabled;
  const int slots = std::min<int>(static_cast<int>(jobs.size()),
                                  static_cast<int>(mask.size()) - 1);
  for (int i = 0; i < slots; ++i)
    if (mask[i]) enabled.push_back(i);
  if (enabled.empty()) throw Error(ErrorCode::empty_mask, "no enabled job slot");

  if (kind == PolicyKind::RANDOM) {
    if (!rng) throw Error(ErrorCode::invalid_config, "RANDOM policy needs an rng");
    std::uniform_int_distribution<std::size_t> pick(0, enabled.size() - 1);
    return enabled[pick(*rng)];
  }

  auto score = [&](const JobFeatures& f) {
    switch (kind) {
      case PolicyKind::SPT:
      case PolicyKind::LPT: return f.head_duration;
      case PolicyKind::SPS:
      case PolicyKind::LPS: return f.remaining_ops;
      case PolicyKind::SSO:
      case PolicyKind::LSO: return f.next_duration;
      default:
        throw Error(ErrorCode::invalid_config,
                    std::string(to_string(kind)) + " is not a dispatching rule");
    }
  };
  const bool minimize = kind == PolicyKind::SPT || kind == PolicyKind::SPS ||
                        kind == PolicyKind::SSO;

  int best = enabled.front();
  int best_score = score(jobs[best]);
  for (int i : enabled) {
    const int s = score(jobs[i]);
    if (minimize ? s < best_score : s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

int RulePolicy::act(const Environment& env, const ActionMask& mask) {
  // Without event-based control the rule can be queried while nothing is
  // allocatable; the only legal move is then to wait.
  const bool any_job = std::any_of(mask.begin(), mask.end() - 1,
                                   [](std::uint8_t b) { return b != 0; });
  if (!any_job && mask.back()) return env.standby_action();
  const auto features = env.job_features();
  return decide(kind_, features, mask, &rng_);
}

EpisodeResult run_episode(Policy& policy, const Instance& instance,
                          const EnvConfig& config) {
  Environment env(instance, config);
  EpisodeResult result;
  ActionMask mask = env.action_mask();
  double fraction_sum = 0.0;
  int decisions = 0;
  while (!env.terminated()) {
    int enabled = 0;
    for (int i = 0; i < env.capacity(); ++i) enabled += mask[i];
    fraction_sum += static_cast<double>(enabled) / env.capacity();
    ++decisions;

    const int action = policy.act(env, mask);
    result.actions.push_back(action);
    mask = env.step(action).mask;
  }
  result.schedule = env.extract_schedule();
  result.decision_steps = env.decision_steps();
  result.clock_ticks = env.clock_ticks();
  result.enabled_fraction = decisions > 0 ? fraction_sum / decisions : 0.0;
  return result;
}

}  // namespace petrirl
