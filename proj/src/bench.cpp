#include "petrirl/bench.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "petrirl/error.hpp"

namespace petrirl {

double optimality_gap(double cmax, double baseline) {
  if (baseline <= 0.0)
    throw Error(ErrorCode::zero_baseline, "baseline makespan must be positive");
  return (baseline - cmax) / baseline;
}

bool BenchReport::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.ok(); });
}

std::string BenchReport::to_csv() const {
  std::ostringstream out;
  out << "instance,jobs,machines,policy,makespan,decision_steps,clock_ticks,"
         "wall_seconds,gap,error\n";
  for (const auto& r : rows) {
    out << r.instance_id << ',' << r.jobs << ',' << r.machines << ',' << r.policy
        << ',' << r.makespan << ',' << r.decision_steps << ',' << r.clock_ticks
        << ',' << std::fixed << std::setprecision(6) << r.wall_seconds << ',';
    if (r.gap) out << std::setprecision(6) << *r.gap;
    out.unsetf(std::ios::fixed);
    out << ',' << '"' << r.error << '"' << '\n';
  }
  return out.str();
}

std::string BenchReport::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(10) << "instance" << std::setw(9) << "size"
      << std::setw(8) << "policy" << std::right << std::setw(9) << "makespan"
      << std::setw(10) << "decisions" << std::setw(8) << "ticks" << std::setw(10)
      << "wall[s]" << std::setw(9) << "gap" << "  status\n";
  for (const auto& r : rows) {
    const std::string size = std::to_string(r.jobs) + "x" + std::to_string(r.machines);
    out << std::left << std::setw(10) << r.instance_id << std::setw(9) << size
        << std::setw(8) << r.policy << std::right << std::setw(9) << r.makespan
        << std::setw(10) << r.decision_steps << std::setw(8) << r.clock_ticks
        << std::setw(10) << std::fixed << std::setprecision(3) << r.wall_seconds;
    if (r.gap) {
      std::ostringstream g;
      g << std::fixed << std::setprecision(1) << *r.gap * 100.0 << '%';
      out << std::setw(9) << g.str();
    } else {
      out << std::setw(9) << "-";
    }
    out.unsetf(std::ios::fixed);
    out << "  " << (r.ok() ? "ok" : r.error) << '\n';
  }
  return out.str();
}

BenchReport run_bench(const std::vector<NamedInstance>& instances,
                      const std::vector<PolicyKind>& policies,
                      const BenchConfig& config) {
  BenchReport report;
  std::optional<NetworkParams> agent;
  std::exception_ptr agent_error;
  if (std::find(policies.begin(), policies.end(), PolicyKind::AGENT) != policies.end()) {
    try {
      if (!config.checkpoint) throw Error(ErrorCode::invalid_config, "AGENT needs --checkpoint");
      agent = load_params(*config.checkpoint);
    } catch (const Error&) {
      agent_error = std::current_exception();
    }
  }

  for (const auto& named : instances) {
    std::optional<int> baseline;
    const std::size_t first_row = report.rows.size();
    for (PolicyKind kind : policies) {
      BenchRow row;
      row.instance_id = named.id;
      row.jobs = named.instance.num_jobs;
      row.machines = named.instance.num_machines;
      row.policy = std::string(to_string(kind));
      try {
        std::unique_ptr<Policy> policy;
        if (kind == PolicyKind::AGENT) {
          if (!agent) std::rethrow_exception(agent_error);
          policy = std::make_unique<AgentPolicy>(*agent);
        } else {
          policy = std::make_unique<RulePolicy>(kind, config.seed);
        }
        const auto t0 = std::chrono::steady_clock::now();
        EpisodeResult ep = run_episode(*policy, named.instance, config.env);
        row.wall_seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
        const auto problems = validate_schedule(ep.schedule, named.instance);
        if (!problems.empty())
          throw Error(ErrorCode::invalid_instance, "invalid schedule: " + problems.front());
        row.makespan = ep.schedule.makespan;
        row.decision_steps = ep.decision_steps;
        row.clock_ticks = ep.clock_ticks;
        row.schedule = std::move(ep.schedule);
        if (config.gap_baseline && kind == *config.gap_baseline) baseline = row.makespan;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      report.rows.push_back(std::move(row));
    }
    if (baseline) {
      for (std::size_t i = first_row; i < report.rows.size(); ++i)
        if (report.rows[i].ok())
          report.rows[i].gap = optimality_gap(report.rows[i].makespan, *baseline);
    }
  }
  return report;
}

std::string_view to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::reference: return "reference";
    case AblationMode::no_mask: return "no_mask";
    case AblationMode::fixed_reward: return "fixed_reward";
    case AblationMode::no_event: return "no_event";
  }
  return "?";
}

AblationMode parse_ablation_mode(std::string_view name) {
  for (auto mode : {AblationMode::reference, AblationMode::no_mask,
                    AblationMode::fixed_reward, AblationMode::no_event})
    if (name == to_string(mode)) return mode;
  throw Error(ErrorCode::invalid_config, "unknown ablation mode '" + std::string(name) + "'");
}

EnvConfig ablation_env_config(AblationMode mode, EnvConfig base) {
  switch (mode) {
    case AblationMode::reference: break;
    case AblationMode::no_mask: base.masking = false; break;
    case AblationMode::fixed_reward: base.reward_mode = RewardMode::fixed_negative; break;
    case AblationMode::no_event: base.event_based = false; break;
  }
  return base;
}

TrainResult run_ablation(const std::vector<Instance>& family, AblationMode mode,
                         const EnvConfig& base, const TrainConfig& config) {
  return train(family, ablation_env_config(mode, base), config);
}

GanttFormat parse_gantt_format(std::string_view name) {
  if (name == "json") return GanttFormat::json;
  if (name == "csv") return GanttFormat::csv;
  if (name == "svg") return GanttFormat::svg;
  throw Error(ErrorCode::invalid_config, "unknown gantt format '" + std::string(name) + "'");
}

void export_gantt(const Schedule& schedule, const std::string& path,
                  GanttFormat format, int num_machines) {
  if (num_machines < 0) {
    num_machines = 0;
    for (const auto& e : schedule.entries) num_machines = std::max(num_machines, e.machine + 1);
  }
  std::string body;
  switch (format) {
    case GanttFormat::json: body = schedule_to_json(schedule); break;
    case GanttFormat::csv: body = schedule_to_csv(schedule); break;
    case GanttFormat::svg: body = schedule_to_svg(schedule, num_machines); break;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  out << body;
  if (!out) throw Error(ErrorCode::io_error, "write failed for '" + path + "'");
}

double measure_enabled_fraction(const Instance& instance, Policy& policy,
                                const EnvConfig& config) {
  return run_episode(policy, instance, config).enabled_fraction;
}

TrainConfig train_config_from_json(const std::string& text, TrainConfig c) {
  try {
    const auto doc = nlohmann::json::parse(text);
    auto read = [&](const char* key, auto& field) {
      if (doc.contains(key)) doc.at(key).get_to(field);
    };
    read("total_steps", c.total_steps);
    read("rollout_length", c.rollout_length);
    read("epochs", c.epochs);
    read("minibatch_size", c.minibatch_size);
    read("gamma", c.gamma);
    read("gae_lambda", c.gae_lambda);
    read("clip_epsilon", c.clip_epsilon);
    read("vf_coef", c.vf_coef);
    read("ent_coef", c.ent_coef);
    read("learning_rate", c.learning_rate);
    read("max_grad_norm", c.max_grad_norm);
    read("hidden", c.hidden);
    read("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace petrirl
