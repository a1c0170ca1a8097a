#include "petrirl/environment.hpp"

#include <algorithm>

#include "petrirl/error.hpp"

namespace petrirl {

double shaped_reward(RewardMode mode, bool standby, int idle_machines,
                     int num_machines, double standby_penalty) {
  if (mode == RewardMode::fixed_negative) return -1.0;
  double r = 1.0 - static_cast<double>(idle_machines) / num_machines;
  if (standby) r -= standby_penalty;
  return r;
}

std::size_t observation_size(int num_machines, int capacity, int depth) {
  return static_cast<std::size_t>(num_machines) +
         static_cast<std::size_t>(capacity) * depth * 2 + 1;
}

Environment::Environment(Instance instance, EnvConfig config)
    : instance_(std::move(instance)), config_(config) {
  reset();
}

std::pair<Observation, ActionMask> Environment::reset(Instance instance,
                                                      EnvConfig config) {
  instance_ = std::move(instance);
  config_ = config;
  return reset();
}

std::pair<Observation, ActionMask> Environment::reset() {
  if (config_.observation_depth < 1)
    throw Error(ErrorCode::invalid_config, "observation_depth must be >= 1");
  capacity_ = config_.capacity.value_or(instance_.num_jobs);
  net_ = PetriNet(instance_, capacity_);
  total_ops_ = instance_.total_operations();
  effective_ = instance_;
  decision_steps_ = 0;
  clock_ticks_ = 0;
  std::vector<FiringEvent> events;
  if (config_.event_based) run_until_decision(events);
  return {observation(), action_mask()};
}

std::size_t Environment::observation_size() const {
  return petrirl::observation_size(instance_.num_machines, capacity_,
                                   config_.observation_depth);
}

bool Environment::allocation_enabled(int slot) const {
  const auto& ready = net_.ready_slot(slot);
  if (ready) return net_.guard(TransitionId::allocation(slot, ready->color));
  const auto& queue = net_.job_queue(slot);
  return !queue.empty() && net_.guard(TransitionId::selection(slot)) &&
         net_.idle(queue.front().color);
}

bool Environment::any_allocation_enabled() const {
  for (int i = 0; i < capacity_; ++i)
    if (allocation_enabled(i)) return true;
  return false;
}

ActionMask Environment::action_mask() const {
  ActionMask mask(num_actions(), 0);
  if (net_.is_terminal()) return mask;
  bool any = false;
  for (int i = 0; i < capacity_; ++i) {
    mask[i] = allocation_enabled(i) ? 1 : 0;
    any = any || mask[i];
  }
  const bool busy = net_.busy_machines() > 0;
  mask[capacity_] = busy && (any || !config_.event_based) ? 1 : 0;
  return mask;
}

std::vector<FiringEvent> Environment::tick() {
  ++clock_ticks_;
  return net_.advance_clock();
}

void Environment::run_until_decision(std::vector<FiringEvent>& events) {
  while (!net_.is_terminal() && !any_allocation_enabled()) {
    auto fired = tick();
    events.insert(events.end(), fired.begin(), fired.end());
  }
}

StepResult Environment::step(int action) {
  if (net_.is_terminal())
    throw Error(ErrorCode::episode_terminated, "step() after termination");
  if (action < 0 || action > capacity_)
    throw Error(ErrorCode::bad_index, "action " + std::to_string(action) +
                                          " outside [0, " +
                                          std::to_string(capacity_) + "]");
  const ActionMask mask = action_mask();
  ++decision_steps_;

  StepResult result;
  if (!mask[action]) {
    if (config_.masking)
      throw Error(ErrorCode::masked_action,
                  "action " + std::to_string(action) + " is disabled");
    result.reward = 0.0;
    result.info.action_applied = false;
  } else {
    const bool standby = action == capacity_;
    auto& events = result.info.last_events;
    if (standby) {
      if (config_.event_based) {
        // Jump to the next completion.
        std::vector<FiringEvent> fired;
        while (fired.empty()) fired = tick();
        events.insert(events.end(), fired.begin(), fired.end());
      } else {
        auto fired = tick();
        events.insert(events.end(), fired.begin(), fired.end());
      }
      // standing by is applied once the clock reaches the completion
      result.reward =
          shaped_reward(config_.reward_mode, true, net_.idle_machines(),
                        num_machines(), config_.standby_penalty);
    } else {
      if (!net_.ready_slot(action)) events.push_back(net_.fire(TransitionId::selection(action)));
      const int machine = net_.ready_slot(action)->color;
      events.push_back(net_.fire(TransitionId::allocation(action, machine)));
      result.reward =
          shaped_reward(config_.reward_mode, false, net_.idle_machines(),
                        num_machines(), config_.standby_penalty);
    }
    if (config_.event_based) run_until_decision(events);
  }

  result.observation = observation();
  result.mask = action_mask();
  result.terminated = net_.is_terminal();
  result.info.clock = net_.clock();
  result.info.decision_steps = decision_steps_;
  result.info.clock_ticks = clock_ticks_;
  return result;
}

Observation Environment::observation() const {
  const int M = instance_.num_machines;
  const int depth = config_.observation_depth;
  const double max_dur = std::max(1, net_.max_duration());
  Observation obs;
  obs.reserve(observation_size());

  for (int m = 0; m < M; ++m) {
    const auto& slot = net_.machine_slot(m);
    const int remaining = slot ? std::max(0, slot->duration - slot->elapsed) : 0;
    obs.push_back(remaining / max_dur);
  }
  for (int i = 0; i < capacity_; ++i) {
    const auto& ready = net_.ready_slot(i);
    const auto& queue = net_.job_queue(i);
    for (int d = 0; d < depth; ++d) {
      const Token* token = nullptr;
      if (ready) {
        token = d == 0 ? &*ready
                       : (d - 1 < static_cast<int>(queue.size()) ? &queue[d - 1] : nullptr);
      } else if (d < static_cast<int>(queue.size())) {
        token = &queue[d];
      }
      if (token) {
        obs.push_back(static_cast<double>(token->color) / M);
        obs.push_back(token->duration / max_dur);
      } else {
        obs.push_back(-1.0);
        obs.push_back(-1.0);
      }
    }
  }
  const int delivered = net_.token_counts().delivered;
  obs.push_back(total_ops_ > 0 ? static_cast<double>(delivered) / total_ops_ : 0.0);
  return obs;
}

std::vector<JobFeatures> Environment::job_features() const {
  std::vector<JobFeatures> out(capacity_);
  for (int i = 0; i < capacity_; ++i) {
    std::vector<const Token*> pending;
    if (const auto& ready = net_.ready_slot(i)) pending.push_back(&*ready);
    for (const auto& t : net_.job_queue(i)) pending.push_back(&t);
    auto& f = out[i];
    if (pending.empty()) continue;
    f.populated = true;
    f.head_machine = pending[0]->color;
    f.head_duration = pending[0]->duration;
    f.remaining_ops = static_cast<int>(pending.size());
    f.next_duration = pending.size() > 1 ? pending[1]->duration : 0;
  }
  return out;
}

void Environment::append_operation(int job, int machine, int duration) {
  if (net_.is_terminal())
    throw Error(ErrorCode::episode_terminated, "cannot append to a finished episode");
  if (job < 0 || job >= capacity_)
    throw Error(ErrorCode::bad_index, "job slot " + std::to_string(job));
  if (machine < 0 || machine >= instance_.num_machines)
    throw Error(ErrorCode::bad_index, "machine " + std::to_string(machine));
  if (duration < 1)
    throw Error(ErrorCode::bad_index, "duration " + std::to_string(duration));
  net_.append_token(job, machine, duration);
  ++total_ops_;
  if (job >= effective_.num_jobs) {
    effective_.num_jobs = job + 1;
    effective_.jobs.resize(job + 1);
  }
  effective_.jobs[job].push_back({machine, duration});
}

Schedule Environment::extract_schedule() const {
  if (!net_.is_terminal())
    throw Error(ErrorCode::not_terminated, "episode still running");
  Schedule s;
  for (int m = 0; m < instance_.num_machines; ++m) {
    for (const auto& token : net_.delivered(m)) {
      for (const auto& h : token.history) {
        if (h.place.kind == PlaceKind::machine)
          s.entries.push_back({token.job, token.seq, m, h.enter, h.leave});
      }
    }
  }
  std::sort(s.entries.begin(), s.entries.end(), [](const auto& a, const auto& b) {
    return std::pair(a.job, a.op) < std::pair(b.job, b.op);
  });
  s.makespan = net_.clock();
  return s;
}

}  // namespace petrirl
