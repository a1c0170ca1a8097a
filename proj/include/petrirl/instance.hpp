#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace petrirl {

struct Operation {
  int machine = 0;   // 0-indexed
  int duration = 1;  // integer time units, >= 1

  friend bool operator==(const Operation&, const Operation&) = default;
};

// A job-shop problem: jobs[i] is the ordered operation list of job i.
struct Instance {
  int num_jobs = 0;
  int num_machines = 0;
  std::vector<std::vector<Operation>> jobs;

  int total_operations() const;
  int max_duration() const;

  // Throws Error(invalid_instance / machine_index_out_of_range) when the
  // structural invariants do not hold.
  void validate() const;

  // True when every job visits every machine exactly once.
  bool is_standard() const;

  friend bool operator==(const Instance&, const Instance&) = default;
};

// ---------------------------------------------------------------------------
// Lehmer generator with Schrage decomposition, used by Taillard's benchmark
// generator. a = 16807, m = 2^31 - 1.

struct LcgState {
  std::int64_t seed = 1;
};

inline constexpr std::int64_t kLcgA = 16807;
inline constexpr std::int64_t kLcgB = 127773;  // m / a
inline constexpr std::int64_t kLcgC = 2836;    // m % a
inline constexpr std::int64_t kLcgM = 2147483647;

struct LcgDraw {
  LcgState state;
  double unit = 0.0;  // strictly inside (0, 1)
};

struct LcgIntDraw {
  LcgState state;
  std::int64_t value = 0;
};

// Throws Error(invalid_seed) unless 1 <= seed <= m - 1.
void check_seed(std::int64_t seed);

LcgDraw lcg_next(LcgState state);

// floor(lo + u * (hi - lo + 1)); consumes exactly one draw.
LcgIntDraw uniform_int(LcgState state, std::int64_t lo, std::int64_t hi);

// Durations are drawn row-major from the time stream, then each job's machine
// order is shuffled from the machine stream (swap j with U[j, M-1]).
Instance generate_random(int jobs, int machines, std::int64_t time_seed,
                         std::int64_t machine_seed);

// ---------------------------------------------------------------------------
// Instance files.

enum class InstanceFormat { taillard, orlib };

InstanceFormat parse_format(std::string_view name);

Instance parse_instance(std::string_view text, InstanceFormat format);
Instance load_instance(const std::string& path, InstanceFormat format);

std::string serialize_instance(const Instance& instance, InstanceFormat format);

}  // namespace petrirl
