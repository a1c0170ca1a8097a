#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "petrirl/instance.hpp"
#include "petrirl/petri_net.hpp"
#include "petrirl/schedule.hpp"

namespace petrirl {

enum class RewardMode { instantaneous, fixed_negative };

struct EnvConfig {
  int observation_depth = 1;
  double standby_penalty = 0.1;
  std::optional<int> capacity;  // defaults to the instance's job count
  RewardMode reward_mode = RewardMode::instantaneous;
  // Query the policy only when an allocation is possible; otherwise the
  // clock runs inside the environment.
  bool event_based = true;
  // When false, disabled actions are accepted as no-ops (zero reward, no
  // state change) instead of raising masked_action.
  bool masking = true;
};

using Observation = std::vector<double>;
using ActionMask = std::vector<std::uint8_t>;  // capacity + 1 bits, last = standby

struct StepInfo {
  int clock = 0;
  int decision_steps = 0;
  int clock_ticks = 0;
  bool action_applied = true;  // false for a no-op under masking = false
  std::vector<FiringEvent> last_events;
};

struct StepResult {
  Observation observation;
  ActionMask mask;
  double reward = 0.0;
  bool terminated = false;
  StepInfo info;
};

// Features a dispatching rule looks at for one job slot.
struct JobFeatures {
  bool populated = false;  // slot holds at least one pending operation
  int head_machine = -1;
  int head_duration = 0;
  int remaining_ops = 0;
  int next_duration = 0;  // 0 when the head is the job's last operation
};

// Utilization reward: 1 - idle/M, minus the penalty when standing by. The
// fixed_negative ablation returns -1 for every decision step.
double shaped_reward(RewardMode mode, bool standby, int idle_machines,
                     int num_machines, double standby_penalty);

std::size_t observation_size(int num_machines, int capacity, int depth);

// Event-driven decision environment over the job-shop Petri net. Action i
// (i < capacity) fires selection + allocation for job slot i at the current
// clock; action `capacity` is standby.
class Environment {
 public:
  Environment(Instance instance, EnvConfig config);

  std::pair<Observation, ActionMask> reset();
  std::pair<Observation, ActionMask> reset(Instance instance, EnvConfig config);

  StepResult step(int action);
  ActionMask action_mask() const;
  Observation observation() const;

  void append_operation(int job, int machine, int duration);
  Schedule extract_schedule() const;

  bool terminated() const { return net_.is_terminal(); }
  int capacity() const { return capacity_; }
  int num_actions() const { return capacity_ + 1; }
  int standby_action() const { return capacity_; }
  int num_machines() const { return instance_.num_machines; }
  std::size_t observation_size() const;
  int decision_steps() const { return decision_steps_; }
  int clock_ticks() const { return clock_ticks_; }
  int total_operations() const { return total_ops_; }

  std::vector<JobFeatures> job_features() const;

  const PetriNet& net() const { return net_; }
  const Instance& instance() const { return instance_; }
  // The instance plus every operation appended during this episode. Slots
  // that never received work stay as empty jobs.
  const Instance& effective_instance() const { return effective_; }
  const EnvConfig& config() const { return config_; }

 private:
  bool allocation_enabled(int slot) const;
  bool any_allocation_enabled() const;
  void run_until_decision(std::vector<FiringEvent>& events);
  std::vector<FiringEvent> tick();

  Instance instance_;
  Instance effective_;
  EnvConfig config_;
  PetriNet net_;
  int capacity_ = 0;
  int total_ops_ = 0;
  int decision_steps_ = 0;
  int clock_ticks_ = 0;
};

}  // namespace petrirl
