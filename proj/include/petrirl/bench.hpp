#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "petrirl/environment.hpp"
#include "petrirl/mppo.hpp"
#include "petrirl/policies.hpp"

namespace petrirl {

// Relative improvement over a baseline makespan: -(cmax - base) / base.
// Positive when cmax beats the baseline.
double optimality_gap(double cmax, double baseline);

struct NamedInstance {
  std::string id;
  Instance instance;
};

struct BenchConfig {
  EnvConfig env;
  std::uint64_t seed = 0;                    // RANDOM policy
  std::optional<std::string> checkpoint;     // required for AGENT
  std::optional<PolicyKind> gap_baseline;    // adds a gap column
};

struct BenchRow {
  std::string instance_id;
  int jobs = 0;
  int machines = 0;
  std::string policy;
  int makespan = 0;
  int decision_steps = 0;
  int clock_ticks = 0;
  double wall_seconds = 0.0;
  std::optional<double> gap;
  std::string error;  // empty when the row succeeded
  Schedule schedule;

  bool ok() const { return error.empty(); }
};

struct BenchReport {
  std::vector<BenchRow> rows;  // ordered by (instance, policy) as requested

  bool all_ok() const;
  std::string to_csv() const;
  std::string to_text() const;
};

// Every makespan is re-checked with validate_schedule before it is reported;
// a row that fails (invalid schedule, missing checkpoint, ...) records the
// error and the run continues.
BenchReport run_bench(const std::vector<NamedInstance>& instances,
                      const std::vector<PolicyKind>& policies,
                      const BenchConfig& config);

enum class AblationMode { reference, no_mask, fixed_reward, no_event };

std::string_view to_string(AblationMode mode);
AblationMode parse_ablation_mode(std::string_view name);
EnvConfig ablation_env_config(AblationMode mode, EnvConfig base);

TrainResult run_ablation(const std::vector<Instance>& family, AblationMode mode,
                         const EnvConfig& base, const TrainConfig& config);

enum class GanttFormat { json, csv, svg };

GanttFormat parse_gantt_format(std::string_view name);
void export_gantt(const Schedule& schedule, const std::string& path,
                  GanttFormat format, int num_machines = -1);

// Mean over decision points of enabled job bits / capacity.
double measure_enabled_fraction(const Instance& instance, Policy& policy,
                                const EnvConfig& config);

TrainConfig train_config_from_json(const std::string& text, TrainConfig base = {});

}  // namespace petrirl
