#include <doctest.h>

#include "oracles.hpp"
#include "petrirl/error.hpp"
#include "petrirl/schedule.hpp"

using namespace petrirl;

namespace {

Instance two_by_two() {
  Instance inst;
  inst.num_jobs = 2;
  inst.num_machines = 2;
  inst.jobs = {{{0, 3}, {1, 2}}, {{1, 4}, {0, 1}}};
  return inst;
}

Schedule good() {
  Schedule s;
  s.entries = {{0, 0, 0, 0, 3}, {0, 1, 1, 4, 6}, {1, 0, 1, 0, 4}, {1, 1, 0, 4, 5}};
  s.makespan = 6;
  return s;
}

}  // namespace

TEST_CASE("valid schedule passes both checkers") {
  CHECK(validate_schedule(good(), two_by_two()).empty());
  CHECK(oracle::count_violations(good(), two_by_two()) == 0);
}

TEST_CASE("each constraint is detected") {
  const Instance inst = two_by_two();
  Schedule s = good();
  s.entries[1].start = 2;  // before op 0 of job 0 ends, and overlaps job 1 on m1
  s.entries[1].end = 4;
  CHECK_FALSE(validate_schedule(s, inst).empty());

  s = good();
  s.entries[3].end = 7;  // wrong duration
  CHECK_FALSE(validate_schedule(s, inst).empty());

  s = good();
  s.entries[2].machine = 0;  // wrong routing
  CHECK_FALSE(validate_schedule(s, inst).empty());

  s = good();
  s.entries.pop_back();  // missing operation
  CHECK_FALSE(validate_schedule(s, inst).empty());

  s = good();
  s.makespan = 9;
  CHECK_FALSE(validate_schedule(s, inst).empty());
}

TEST_CASE("json and csv renderings") {
  const Schedule s = good();
  const std::string json = schedule_to_json(s);
  CHECK(schedule_from_json(json) == s);
  CHECK(json == schedule_to_json(s));
  CHECK(schedule_to_csv(s).rfind("job,op,machine,start,end\n", 0) == 0);
  CHECK_THROWS_AS(schedule_from_json("[1,2"), Error);
}
