#pragma once

#include <string>
#include <vector>

#include "petrirl/instance.hpp"

namespace petrirl {

struct ScheduleEntry {
  int job = 0;
  int op = 0;  // sequence index within the job
  int machine = 0;
  int start = 0;
  int end = 0;

  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

struct Schedule {
  std::vector<ScheduleEntry> entries;  // sorted by (job, op)
  int makespan = 0;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

// Checks machine non-overlap, job precedence, exact durations, routing and
// completeness against the instance. Returns human-readable violations; an
// empty list means the schedule is valid. Does not look at any environment
// state.
std::vector<std::string> validate_schedule(const Schedule& schedule,
                                           const Instance& instance);

std::string schedule_to_json(const Schedule& schedule);
Schedule schedule_from_json(const std::string& text);
std::string schedule_to_csv(const Schedule& schedule);
std::string schedule_to_svg(const Schedule& schedule, int num_machines);

}  // namespace petrirl
