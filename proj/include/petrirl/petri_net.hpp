#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "petrirl/instance.hpp"

namespace petrirl {

enum class PlaceKind { job, ready, machine, idle, delivery };

struct PlaceId {
  PlaceKind kind = PlaceKind::job;
  int index = 0;

  friend bool operator==(const PlaceId&, const PlaceId&) = default;
};

struct HistoryEntry {
  PlaceId place;
  int enter = 0;
  int leave = -1;  // -1 while the token still sits in the place
};

// Colored operation token. The color is the destination machine.
struct Token {
  int color = 0;
  int job = 0;
  int duration = 1;
  int seq = 0;
  int elapsed = 0;
  std::vector<HistoryEntry> history;
};

enum class TransitionKind { selection, allocation, delivery };

// Selection transitions are indexed by job slot, delivery transitions by
// machine. Allocation transitions are job-indexed and carry a machine color;
// the (job, machine) pair identifies one colored allocation.
struct TransitionId {
  TransitionKind kind = TransitionKind::selection;
  int index = 0;
  int color = -1;

  static TransitionId selection(int job) { return {TransitionKind::selection, job, -1}; }
  static TransitionId allocation(int job, int machine) {
    return {TransitionKind::allocation, job, machine};
  }
  static TransitionId delivery(int machine) {
    return {TransitionKind::delivery, machine, -1};
  }

  friend bool operator==(const TransitionId&, const TransitionId&) = default;
};

std::string to_string(TransitionId id);

struct FiringEvent {
  TransitionId transition;
  int job = 0;
  int machine = 0;
  int seq = 0;
  int clock = 0;
};

struct TokenCounts {
  int queued = 0;
  int ready = 0;
  int processing = 0;
  int delivered = 0;

  int total() const { return queued + ready + processing + delivered; }
};

// Colored timed Petri net for one job shop. Places are partitioned into job
// queues, ready slots (capacity 1), machine processing places, idle markings
// and delivery sinks, plus one precedence marking per job slot that is
// consumed by allocation and restored by delivery so a job never has two
// operations in flight. The clock ticks in whole time units.
class PetriNet {
 public:
  PetriNet() = default;

  // capacity >= instance.num_jobs; slots beyond num_jobs start empty.
  PetriNet(const Instance& instance, int capacity);

  int capacity() const { return static_cast<int>(job_places_.size()); }
  int num_machines() const { return static_cast<int>(machine_places_.size()); }
  int clock() const { return clock_; }

  // Control signal for the controllable (selection/allocation) transitions.
  void set_control(bool asserted) { control_ = asserted; }
  bool control() const { return control_; }

  bool guard(TransitionId t) const;
  FiringEvent fire(TransitionId t);

  // One tick: clock += 1, every processing token ages, then every enabled
  // delivery fires in ascending machine order.
  std::vector<FiringEvent> advance_clock();

  bool is_terminal() const;

  // Appends an operation token at the tail of a job queue.
  void append_token(int job, int machine, int duration);

  const std::deque<Token>& job_queue(int job) const { return job_places_.at(job); }
  const std::optional<Token>& ready_slot(int job) const { return ready_places_.at(job); }
  const std::optional<Token>& machine_slot(int machine) const {
    return machine_places_.at(machine);
  }
  bool idle(int machine) const { return idle_places_.at(machine) == 1; }
  // False while one of the job's operations occupies a machine.
  bool job_free(int job) const { return job_free_places_.at(job) == 1; }
  const std::vector<Token>& delivered(int machine) const {
    return delivery_places_.at(machine);
  }

  int busy_machines() const;
  int idle_machines() const { return num_machines() - busy_machines(); }
  TokenCounts token_counts() const;
  int max_duration() const { return max_duration_; }

  const std::vector<FiringEvent>& event_log() const { return events_; }
  // One JSON object per line: {clock, transition, job, machine, seq}.
  std::string event_log_jsonl() const;

 private:
  void check_transition(TransitionId t) const;
  static void move_history(Token& token, PlaceId to, int clock);

  std::vector<std::deque<Token>> job_places_;
  std::vector<std::optional<Token>> ready_places_;
  std::vector<std::optional<Token>> machine_places_;
  std::vector<int> idle_places_;
  std::vector<int> job_free_places_;  // precedence marking per job slot
  std::vector<std::vector<Token>> delivery_places_;
  std::vector<int> next_seq_;
  std::vector<FiringEvent> events_;
  int clock_ = 0;
  int max_duration_ = 0;
  bool control_ = true;
};

}  // namespace petrirl
