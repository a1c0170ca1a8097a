#pragma once

// Reference implementations used only by the tests. They share no code with
// the library beyond the plain Instance/Schedule data types.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "petrirl/environment.hpp"
#include "petrirl/instance.hpp"
#include "petrirl/schedule.hpp"

namespace oracle {

// Plain Lehmer step with 64-bit products.
inline std::int64_t lehmer_next(std::int64_t x) {
  return static_cast<std::int64_t>((static_cast<std::uint64_t>(x) * 16807ULL) % 2147483647ULL);
}

// Independent schedule checker: returns the number of violated constraints.
inline int count_violations(const petrirl::Schedule& s, const petrirl::Instance& inst) {
  int bad = 0;
  std::vector<std::vector<const petrirl::ScheduleEntry*>> by_job(inst.num_jobs);
  std::vector<std::vector<const petrirl::ScheduleEntry*>> by_machine(inst.num_machines);
  for (const auto& e : s.entries) {
    if (e.job < 0 || e.job >= inst.num_jobs || e.op < 0 ||
        e.op >= static_cast<int>(inst.jobs[e.job].size())) {
      ++bad;
      continue;
    }
    const auto& op = inst.jobs[e.job][e.op];
    if (e.machine != op.machine) ++bad;
    if (e.end - e.start != op.duration) ++bad;
    if (e.start < 0) ++bad;
    by_job[e.job].push_back(&e);
    if (e.machine >= 0 && e.machine < inst.num_machines) by_machine[e.machine].push_back(&e);
  }
  int latest = 0;
  for (int j = 0; j < inst.num_jobs; ++j) {
    auto& v = by_job[j];
    if (v.size() != inst.jobs[j].size()) ++bad;
    std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->op < b->op; });
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (v[k]->op != static_cast<int>(k)) ++bad;
      if (k > 0 && v[k]->start < v[k - 1]->end) ++bad;
      latest = std::max(latest, v[k]->end);
    }
  }
  for (auto& v : by_machine) {
    std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->start < b->start; });
    for (std::size_t k = 1; k < v.size(); ++k)
      if (v[k]->start < v[k - 1]->end) ++bad;
  }
  if (latest != s.makespan) ++bad;
  return bad;
}

// Exhaustive scheduler over machine orderings: for every combination of
// per-machine job permutations, build the semi-active schedule by fixed-point
// relaxation of the precedence graph (infeasible cycles are skipped) and keep
// the best makespan. Assumes every job visits every machine once.
inline int permutation_optimum(const petrirl::Instance& inst) {
  const int J = inst.num_jobs, M = inst.num_machines;
  std::vector<int> base(J);
  std::iota(base.begin(), base.end(), 0);
  std::vector<std::vector<int>> perms;
  do perms.push_back(base);
  while (std::next_permutation(base.begin(), base.end()));

  // position of machine m in job j's routing
  std::vector<std::vector<int>> pos(J, std::vector<int>(M, -1));
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < static_cast<int>(inst.jobs[j].size()); ++k)
      pos[j][inst.jobs[j][k].machine] = k;

  int best = std::numeric_limits<int>::max();
  std::vector<int> choice(M, 0);
  while (true) {
    std::vector<std::vector<int>> start(J, std::vector<int>(M, 0));
    bool feasible = false;
    // longest-path relaxation; more than J*M rounds means a cycle
    for (int round = 0; round <= J * M + 1; ++round) {
      bool changed = false;
      for (int j = 0; j < J; ++j)
        for (int k = 1; k < M; ++k) {
          const int t = start[j][k - 1] + inst.jobs[j][k - 1].duration;
          if (start[j][k] < t) { start[j][k] = t; changed = true; }
        }
      for (int m = 0; m < M; ++m) {
        const auto& order = perms[choice[m]];
        for (int q = 1; q < J; ++q) {
          const int a = order[q - 1], b = order[q];
          const int ka = pos[a][m], kb = pos[b][m];
          const int t = start[a][ka] + inst.jobs[a][ka].duration;
          if (start[b][kb] < t) { start[b][kb] = t; changed = true; }
        }
      }
      if (!changed) { feasible = true; break; }
    }
    if (feasible) {
      int cmax = 0;
      for (int j = 0; j < J; ++j)
        cmax = std::max(cmax, start[j][M - 1] + inst.jobs[j][M - 1].duration);
      best = std::min(best, cmax);
    }
    int m = 0;
    while (m < M && ++choice[m] == static_cast<int>(perms.size())) choice[m++] = 0;
    if (m == M) break;
  }
  return best;
}

// Depth-first search over every legal action sequence of the environment.
// Returns the smallest terminal makespan; `leaves` counts finished episodes.
inline int enumerate_environment(const petrirl::Environment& root, long* leaves = nullptr) {
  int best = std::numeric_limits<int>::max();
  std::function<void(const petrirl::Environment&)> dfs = [&](const petrirl::Environment& env) {
    if (env.terminated()) {
      best = std::min(best, env.extract_schedule().makespan);
      if (leaves) ++*leaves;
      return;
    }
    const auto mask = env.action_mask();
    for (int a = 0; a < static_cast<int>(mask.size()); ++a) {
      if (!mask[a]) continue;
      petrirl::Environment child = env;
      child.step(a);
      dfs(child);
    }
  };
  dfs(root);
  return best;
}

// Central finite differences of f with respect to every entry of x.
inline Eigen::VectorXd finite_difference(const std::function<double()>& f, Eigen::VectorXd& x,
                                         double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x(i);
    x(i) = keep + h;
    const double up = f();
    x(i) = keep - h;
    const double down = f();
    x(i) = keep;
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

}  // namespace oracle
