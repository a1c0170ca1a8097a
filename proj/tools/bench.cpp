#include <glob.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "petrirl/bench.hpp"
#include "petrirl/error.hpp"

namespace fs = std::filesystem;
using namespace petrirl;

namespace {

std::vector<std::string> expand(const std::vector<std::string>& patterns) {
  std::vector<std::string> paths;
  for (const auto& pattern : patterns) {
    glob_t g{};
    if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
    } else {
      paths.push_back(pattern);  // let the loader report the missing file
    }
    globfree(&g);
  }
  return paths;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path.string() + "'");
  out << body;
}

std::vector<PolicyKind> parse_policies(const std::vector<std::string>& names) {
  std::vector<PolicyKind> out;
  for (const auto& n : names) {
    if (n == "all" || n == "heuristics") {
      out.insert(out.end(), std::begin(kHeuristics), std::end(kHeuristics));
      if (n == "all") out.push_back(PolicyKind::RANDOM);
    } else {
      out.push_back(parse_policy(n));
    }
  }
  return out;
}

struct EnvOptions {
  int capacity = 0;
  int depth = 1;
  double penalty = 0.1;

  EnvConfig config() const {
    EnvConfig c;
    c.observation_depth = depth;
    c.standby_penalty = penalty;
    if (capacity > 0) c.capacity = capacity;
    return c;
  }
  void add(CLI::App* app) {
    app->add_option("--capacity", capacity, "job slots (default: number of jobs)");
    app->add_option("--depth", depth, "observation depth per job slot");
    app->add_option("--standby-penalty", penalty);
  }
};

TrainConfig load_train_config(const std::string& path, long steps, std::uint64_t seed,
                              bool seed_given) {
  TrainConfig c;
  if (!path.empty()) c = train_config_from_json(read_file(path));
  if (steps > 0) c.total_steps = steps;
  if (seed_given) c.seed = seed;
  c.validate();
  return c;
}

void write_training(const TrainResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  save_params(result.params, (dir / "params.json").string());
  write_file(dir / "metrics.csv", metrics_to_csv(result.log));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Petri-net job-shop environment, dispatching rules and masked PPO"};
  app.require_subcommand(1);
  std::string format = "orlib";

  // run
  auto* run = app.add_subcommand("run", "benchmark policies on instance files");
  std::vector<std::string> run_instances;
  std::vector<std::string> run_policies{"heuristics"};
  std::string checkpoint, run_out, gap_baseline, gantt_dir;
  std::uint64_t run_seed = 0;
  EnvOptions run_env;
  run->add_option("--instances", run_instances, "instance files or glob patterns")->required();
  run->add_option("--format", format, "taillard | orlib");
  run->add_option("--policy", run_policies, "SPT LPT SPS LPS SSO LSO RANDOM AGENT heuristics all")
      ->delimiter(',');
  run->add_option("--checkpoint", checkpoint, "params.json for AGENT");
  run->add_option("--seed", run_seed, "seed for RANDOM");
  run->add_option("--gap-baseline", gap_baseline, "policy used as the optimality-gap baseline");
  run->add_option("--out", run_out, "write the report as CSV");
  run->add_option("--gantt-dir", gantt_dir, "write one schedule JSON per row");
  run_env.add(run);

  // train
  auto* tr = app.add_subcommand("train", "train a masked PPO agent");
  std::vector<std::string> tr_instances;
  std::string tr_config, tr_out = "ckpt";
  long tr_steps = 0;
  std::uint64_t tr_seed = 0;
  EnvOptions tr_env;
  tr->add_option("--instance", tr_instances, "training instance(s)")->required();
  tr->add_option("--format", format);
  tr->add_option("--steps", tr_steps, "total decision steps");
  tr->add_option("--config", tr_config, "train.json with hyper-parameters");
  auto* tr_seed_opt = tr->add_option("--seed", tr_seed);
  tr->add_option("--out", tr_out, "output directory");
  tr_env.add(tr);

  // ablate
  auto* ab = app.add_subcommand("ablate", "train one ablation variant");
  std::string ab_mode = "reference", ab_instance, ab_config, ab_out = "ablation";
  long ab_steps = 0;
  std::uint64_t ab_seed = 0;
  EnvOptions ab_env;
  ab->add_option("--mode", ab_mode, "reference | no_mask | fixed_reward | no_event");
  ab->add_option("--instance", ab_instance)->required();
  ab->add_option("--format", format);
  ab->add_option("--steps", ab_steps);
  ab->add_option("--config", ab_config);
  auto* ab_seed_opt = ab->add_option("--seed", ab_seed);
  ab->add_option("--out", ab_out, "output directory");
  ab_env.add(ab);

  // gantt
  auto* ga = app.add_subcommand("gantt", "convert a schedule JSON to SVG or CSV");
  std::string ga_schedule, ga_svg, ga_csv;
  ga->add_option("--schedule", ga_schedule)->required();
  ga->add_option("--svg", ga_svg);
  ga->add_option("--csv", ga_csv);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random instance");
  int gen_jobs = 15, gen_machines = 15;
  std::int64_t time_seed = 840612802, machine_seed = 398197754;
  std::string gen_out;
  gen->add_option("--jobs", gen_jobs);
  gen->add_option("--machines", gen_machines);
  gen->add_option("--time-seed", time_seed);
  gen->add_option("--machine-seed", machine_seed);
  gen->add_option("--format", format);
  gen->add_option("--out", gen_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    const InstanceFormat fmt = parse_format(format);

    if (*run) {
      std::vector<NamedInstance> instances;
      std::vector<BenchRow> load_failures;
      for (const auto& path : expand(run_instances)) {
        const std::string id = fs::path(path).stem().string();
        try {
          instances.push_back({id, load_instance(path, fmt)});
        } catch (const Error& e) {
          BenchRow row;
          row.instance_id = id;
          row.policy = "-";
          row.error = e.what();
          load_failures.push_back(std::move(row));
        }
      }
      BenchConfig config;
      config.env = run_env.config();
      config.seed = run_seed;
      if (!checkpoint.empty()) config.checkpoint = checkpoint;
      if (!gap_baseline.empty()) config.gap_baseline = parse_policy(gap_baseline);
      BenchReport report = run_bench(instances, parse_policies(run_policies), config);
      report.rows.insert(report.rows.end(), load_failures.begin(), load_failures.end());

      std::cout << report.to_text();
      if (!run_out.empty()) write_file(run_out, report.to_csv());
      if (!gantt_dir.empty()) {
        fs::create_directories(gantt_dir);
        for (const auto& row : report.rows)
          if (row.ok())
            export_gantt(row.schedule,
                         (fs::path(gantt_dir) / (row.instance_id + "_" + row.policy + ".json"))
                             .string(),
                         GanttFormat::json);
      }
      return report.all_ok() ? 0 : 1;
    }

    if (*tr) {
      std::vector<Instance> family;
      for (const auto& path : expand(tr_instances)) family.push_back(load_instance(path, fmt));
      const TrainConfig config =
          load_train_config(tr_config, tr_steps, tr_seed, tr_seed_opt->count() > 0);
      const TrainResult result = train(family, tr_env.config(), config, [](const MetricsRow& r) {
        std::cout << "step " << r.step << "  ep_len " << r.ep_len << "  ep_rew " << r.ep_rew
                  << "  kl " << r.kl << "  entropy " << r.entropy << '\n';
      });
      write_training(result, tr_out);
      const EpisodeResult ep = evaluate(result.params, family.front(), tr_env.config());
      std::cout << "greedy makespan " << ep.schedule.makespan << '\n';
      return 0;
    }

    if (*ab) {
      const Instance instance = load_instance(ab_instance, fmt);
      const TrainConfig config =
          load_train_config(ab_config, ab_steps, ab_seed, ab_seed_opt->count() > 0);
      const TrainResult result =
          run_ablation({instance}, parse_ablation_mode(ab_mode), ab_env.config(), config);
      write_training(result, ab_out);
      if (!result.log.empty())
        std::cout << ab_mode << ": final ep_len " << result.log.back().ep_len << '\n';
      return 0;
    }

    if (*ga) {
      const Schedule schedule = schedule_from_json(read_file(ga_schedule));
      if (ga_svg.empty() && ga_csv.empty())
        throw Error(ErrorCode::invalid_config, "give --svg and/or --csv");
      if (!ga_svg.empty()) export_gantt(schedule, ga_svg, GanttFormat::svg);
      if (!ga_csv.empty()) export_gantt(schedule, ga_csv, GanttFormat::csv);
      return 0;
    }

    if (*gen) {
      const std::string text =
          serialize_instance(generate_random(gen_jobs, gen_machines, time_seed, machine_seed), fmt);
      if (gen_out.empty())
        std::cout << text;
      else
        write_file(gen_out, text);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
