#include "petrirl/petri_net.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "petrirl/error.hpp"

namespace petrirl {

std::string to_string(TransitionId id) {
  switch (id.kind) {
    case TransitionKind::selection:
      return "select[" + std::to_string(id.index) + "]";
    case TransitionKind::allocation:
      return "allocate[" + std::to_string(id.index) + "->" +
             std::to_string(id.color) + "]";
    case TransitionKind::delivery:
      return "deliver[" + std::to_string(id.index) + "]";
  }
  return "?";
}

PetriNet::PetriNet(const Instance& instance, int capacity) {
  instance.validate();
  if (capacity < instance.num_jobs)
    throw Error(ErrorCode::capacity_too_small,
                "capacity " + std::to_string(capacity) + " < " +
                    std::to_string(instance.num_jobs) + " jobs");
  const int M = instance.num_machines;
  job_places_.resize(capacity);
  ready_places_.resize(capacity);
  next_seq_.assign(capacity, 0);
  job_free_places_.assign(capacity, 1);
  machine_places_.resize(M);
  idle_places_.assign(M, 1);
  delivery_places_.resize(M);

  for (int i = 0; i < instance.num_jobs; ++i) {
    for (const auto& op : instance.jobs[i]) append_token(i, op.machine, op.duration);
  }
}

void PetriNet::append_token(int job, int machine, int duration) {
  if (job < 0 || job >= capacity())
    throw Error(ErrorCode::bad_index, "job slot " + std::to_string(job));
  if (machine < 0 || machine >= num_machines())
    throw Error(ErrorCode::bad_index, "machine " + std::to_string(machine));
  if (duration < 1)
    throw Error(ErrorCode::bad_index, "duration must be >= 1");
  Token token;
  token.color = machine;
  token.job = job;
  token.duration = duration;
  token.seq = next_seq_[job]++;
  token.history.push_back({PlaceId{PlaceKind::job, job}, clock_, -1});
  job_places_[job].push_back(std::move(token));
  max_duration_ = std::max(max_duration_, duration);
}

void PetriNet::check_transition(TransitionId t) const {
  bool ok = false;
  switch (t.kind) {
    case TransitionKind::selection:
      ok = t.index >= 0 && t.index < capacity();
      break;
    case TransitionKind::allocation:
      ok = t.index >= 0 && t.index < capacity() && t.color >= 0 &&
           t.color < num_machines();
      break;
    case TransitionKind::delivery:
      ok = t.index >= 0 && t.index < num_machines();
      break;
  }
  if (!ok) throw Error(ErrorCode::unknown_transition, to_string(t));
}

bool PetriNet::guard(TransitionId t) const {
  check_transition(t);
  switch (t.kind) {
    case TransitionKind::selection:
      return control_ && !job_places_[t.index].empty() &&
             !ready_places_[t.index].has_value() &&
             job_free_places_[t.index] >= 1;
    case TransitionKind::allocation: {
      const auto& ready = ready_places_[t.index];
      return control_ && idle_places_[t.color] >= 1 &&
             job_free_places_[t.index] >= 1 && ready.has_value() &&
             ready->color == t.color;
    }
    case TransitionKind::delivery: {
      const auto& slot = machine_places_[t.index];
      return slot.has_value() && slot->elapsed >= slot->duration;
    }
  }
  return false;
}

void PetriNet::move_history(Token& token, PlaceId to, int clock) {
  token.history.back().leave = clock;
  token.history.push_back({to, clock, -1});
}

FiringEvent PetriNet::fire(TransitionId t) {
  if (!guard(t))
    throw Error(ErrorCode::guard_violation, to_string(t) + " is not enabled");

  FiringEvent event{t, 0, 0, 0, clock_};
  switch (t.kind) {
    case TransitionKind::selection: {
      Token token = std::move(job_places_[t.index].front());
      job_places_[t.index].pop_front();
      move_history(token, {PlaceKind::ready, t.index}, clock_);
      event.job = token.job;
      event.machine = token.color;
      event.seq = token.seq;
      ready_places_[t.index] = std::move(token);
      break;
    }
    case TransitionKind::allocation: {
      Token token = std::move(*ready_places_[t.index]);
      ready_places_[t.index].reset();
      idle_places_[t.color] -= 1;
      job_free_places_[t.index] -= 1;
      token.elapsed = 0;
      move_history(token, {PlaceKind::machine, t.color}, clock_);
      event.job = token.job;
      event.machine = token.color;
      event.seq = token.seq;
      machine_places_[t.color] = std::move(token);
      break;
    }
    case TransitionKind::delivery: {
      Token token = std::move(*machine_places_[t.index]);
      machine_places_[t.index].reset();
      idle_places_[t.index] += 1;
      job_free_places_[token.job] += 1;
      move_history(token, {PlaceKind::delivery, t.index}, clock_);
      event.job = token.job;
      event.machine = token.color;
      event.seq = token.seq;
      delivery_places_[t.index].push_back(std::move(token));
      break;
    }
  }
  events_.push_back(event);
  return event;
}

std::vector<FiringEvent> PetriNet::advance_clock() {
  ++clock_;
  for (auto& slot : machine_places_)
    if (slot) ++slot->elapsed;
  std::vector<FiringEvent> fired;
  for (int m = 0; m < num_machines(); ++m) {
    const auto t = TransitionId::delivery(m);
    if (guard(t)) fired.push_back(fire(t));
  }
  return fired;
}

bool PetriNet::is_terminal() const {
  for (const auto& q : job_places_)
    if (!q.empty()) return false;
  for (const auto& r : ready_places_)
    if (r) return false;
  for (const auto& m : machine_places_)
    if (m) return false;
  return true;
}

int PetriNet::busy_machines() const {
  return static_cast<int>(std::count_if(machine_places_.begin(), machine_places_.end(),
                                        [](const auto& s) { return s.has_value(); }));
}

TokenCounts PetriNet::token_counts() const {
  TokenCounts c;
  for (const auto& q : job_places_) c.queued += static_cast<int>(q.size());
  for (const auto& r : ready_places_) c.ready += r ? 1 : 0;
  for (const auto& m : machine_places_) c.processing += m ? 1 : 0;
  for (const auto& d : delivery_places_) c.delivered += static_cast<int>(d.size());
  return c;
}

std::string PetriNet::event_log_jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    nlohmann::ordered_json line;
    line["clock"] = e.clock;
    line["transition"] = to_string(e.transition);
    line["job"] = e.job;
    line["machine"] = e.machine;
    line["seq"] = e.seq;
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace petrirl
