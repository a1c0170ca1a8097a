#include "petrirl/schedule.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "petrirl/error.hpp"

namespace petrirl {

std::vector<std::string> validate_schedule(const Schedule& schedule,
                                           const Instance& instance) {
  std::vector<std::string> problems;
  auto report = [&](const std::string& what) { problems.push_back(what); };

  std::map<std::pair<int, int>, const ScheduleEntry*> by_op;
  int latest = 0;
  for (const auto& e : schedule.entries) {
    const std::string tag =
        "(job " + std::to_string(e.job) + ", op " + std::to_string(e.op) + ")";
    if (e.job < 0 || e.job >= instance.num_jobs || e.op < 0 ||
        e.op >= static_cast<int>(instance.jobs[e.job].size())) {
      report(tag + " does not exist in the instance");
      continue;
    }
    if (!by_op.emplace(std::make_pair(e.job, e.op), &e).second)
      report(tag + " scheduled twice");
    const Operation& op = instance.jobs[e.job][e.op];
    if (e.machine != op.machine)
      report(tag + " on machine " + std::to_string(e.machine) + ", expected " +
             std::to_string(op.machine));
    if (e.end - e.start != op.duration)
      report(tag + " lasts " + std::to_string(e.end - e.start) + ", expected " +
             std::to_string(op.duration));
    if (e.start < 0) report(tag + " starts before time 0");
    latest = std::max(latest, e.end);
  }
  if (static_cast<int>(by_op.size()) != instance.total_operations())
    report("schedule covers " + std::to_string(by_op.size()) + " of " +
           std::to_string(instance.total_operations()) + " operations");
  if (schedule.makespan != latest)
    report("makespan " + std::to_string(schedule.makespan) +
           " differs from latest completion " + std::to_string(latest));

  for (int j = 0; j < instance.num_jobs; ++j) {
    for (int k = 0; k + 1 < static_cast<int>(instance.jobs[j].size()); ++k) {
      auto a = by_op.find({j, k});
      auto b = by_op.find({j, k + 1});
      if (a == by_op.end() || b == by_op.end()) continue;
      if (a->second->end > b->second->start)
        report("job " + std::to_string(j) + ": op " + std::to_string(k + 1) +
               " starts before op " + std::to_string(k) + " ends");
    }
  }

  std::map<int, std::vector<const ScheduleEntry*>> by_machine;
  for (const auto& [key, e] : by_op) by_machine[e->machine].push_back(e);
  for (auto& [machine, list] : by_machine) {
    std::sort(list.begin(), list.end(),
              [](const auto* a, const auto* b) { return a->start < b->start; });
    for (std::size_t i = 1; i < list.size(); ++i)
      if (list[i - 1]->end > list[i]->start)
        report("machine " + std::to_string(machine) + ": jobs " +
               std::to_string(list[i - 1]->job) + " and " +
               std::to_string(list[i]->job) + " overlap");
  }
  return problems;
}

std::string schedule_to_json(const Schedule& schedule) {
  nlohmann::ordered_json ops = nlohmann::ordered_json::array();
  for (const auto& e : schedule.entries) {
    nlohmann::ordered_json row;
    row["job"] = e.job;
    row["op"] = e.op;
    row["machine"] = e.machine;
    row["start"] = e.start;
    row["end"] = e.end;
    ops.push_back(std::move(row));
  }
  nlohmann::ordered_json doc;
  doc["makespan"] = schedule.makespan;
  doc["operations"] = std::move(ops);
  return doc.dump(2) + "\n";
}

Schedule schedule_from_json(const std::string& text) {
  Schedule s;
  try {
    const auto doc = nlohmann::json::parse(text);
    s.makespan = doc.at("makespan").get<int>();
    for (const auto& row : doc.at("operations")) {
      s.entries.push_back({row.at("job").get<int>(), row.at("op").get<int>(),
                           row.at("machine").get<int>(),
                           row.at("start").get<int>(), row.at("end").get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("schedule json: ") + e.what());
  }
  return s;
}

std::string schedule_to_csv(const Schedule& schedule) {
  std::ostringstream out;
  out << "job,op,machine,start,end\n";
  for (const auto& e : schedule.entries)
    out << e.job << ',' << e.op << ',' << e.machine << ',' << e.start << ','
        << e.end << '\n';
  return out.str();
}

std::string schedule_to_svg(const Schedule& schedule, int num_machines) {
  constexpr int kRowHeight = 24;
  constexpr int kLabelWidth = 40;
  constexpr double kWidth = 1000.0;
  const double scale = schedule.makespan > 0 ? kWidth / schedule.makespan : 1.0;
  const int height = num_machines * kRowHeight + 20;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << kLabelWidth + static_cast<int>(kWidth) + 10 << "\" height=\"" << height
      << "\" font-family=\"monospace\" font-size=\"10\">\n";
  for (int m = 0; m < num_machines; ++m) {
    const int y = m * kRowHeight;
    out << "<g class=\"machine\" data-machine=\"" << m << "\">"
        << "<text x=\"2\" y=\"" << y + 16 << "\">M" << m << "</text></g>\n";
  }
  for (const auto& e : schedule.entries) {
    const double x = kLabelWidth + e.start * scale;
    const double w = (e.end - e.start) * scale;
    const int y = e.machine * kRowHeight + 2;
    // Golden-angle hue spacing keeps neighbouring job colours apart.
    const int hue = (e.job * 137) % 360;
    out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w
        << "\" height=\"" << kRowHeight - 4 << "\" fill=\"hsl(" << hue
        << ",60%,65%)\" stroke=\"black\" stroke-width=\"0.5\"><title>job "
        << e.job << " op " << e.op << " [" << e.start << ", " << e.end
        << ")</title></rect>\n";
    out << "<text x=\"" << x + 2 << "\" y=\"" << y + 14 << "\">" << e.job
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace petrirl
