#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "petrirl/environment.hpp"

namespace petrirl {

enum class PolicyKind { SPT, LPT, SPS, LPS, SSO, LSO, RANDOM, AGENT };

inline constexpr PolicyKind kHeuristics[] = {PolicyKind::SPT, PolicyKind::LPT,
                                             PolicyKind::SPS, PolicyKind::LPS,
                                             PolicyKind::SSO, PolicyKind::LSO};

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy(std::string_view name);  // case-insensitive

using Rng = std::mt19937_64;

// Picks an enabled job slot by a dispatching rule; ties go to the lowest job
// index. RANDOM draws uniformly over enabled job slots and needs `rng`.
// Heuristics never stand by. Throws empty_mask when no job slot is enabled.
int decide(PolicyKind kind, std::span<const JobFeatures> jobs,
           const ActionMask& mask, Rng* rng = nullptr);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual int act(const Environment& env, const ActionMask& mask) = 0;
  virtual std::string name() const = 0;
};

class RulePolicy final : public Policy {
 public:
  explicit RulePolicy(PolicyKind kind, std::uint64_t seed = 0)
      : kind_(kind), rng_(seed) {}

  int act(const Environment& env, const ActionMask& mask) override;
  std::string name() const override { return std::string(to_string(kind_)); }

 private:
  PolicyKind kind_;
  Rng rng_;
};

struct EpisodeResult {
  Schedule schedule;
  int decision_steps = 0;
  int clock_ticks = 0;
  // Mean over decision points of enabled job bits / capacity.
  double enabled_fraction = 0.0;
  std::vector<int> actions;
};

// Drives a fresh environment to termination.
EpisodeResult run_episode(Policy& policy, const Instance& instance,
                          const EnvConfig& config);

}  // namespace petrirl
