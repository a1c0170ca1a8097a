#include "petrirl/instance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "petrirl/error.hpp"

namespace petrirl {

int Instance::total_operations() const {
  int total = 0;
  for (const auto& job : jobs) total += static_cast<int>(job.size());
  return total;
}

int Instance::max_duration() const {
  int best = 0;
  for (const auto& job : jobs)
    for (const auto& op : job) best = std::max(best, op.duration);
  return best;
}

void Instance::validate() const {
  if (num_jobs < 0 || num_machines < 1)
    throw Error(ErrorCode::invalid_instance,
                "need num_jobs >= 0 and num_machines >= 1");
  if (static_cast<int>(jobs.size()) != num_jobs)
    throw Error(ErrorCode::invalid_instance,
                "job list length " + std::to_string(jobs.size()) +
                    " differs from num_jobs " + std::to_string(num_jobs));
  for (int i = 0; i < num_jobs; ++i) {
    if (jobs[i].empty())
      throw Error(ErrorCode::invalid_instance,
                  "job " + std::to_string(i) + " has no operations");
    for (const auto& op : jobs[i]) {
      if (op.machine < 0 || op.machine >= num_machines)
        throw Error(ErrorCode::machine_index_out_of_range,
                    "job " + std::to_string(i) + " uses machine " +
                        std::to_string(op.machine));
      if (op.duration < 1)
        throw Error(ErrorCode::invalid_instance,
                    "job " + std::to_string(i) + " has a non-positive duration");
    }
  }
}

bool Instance::is_standard() const {
  for (const auto& job : jobs) {
    if (static_cast<int>(job.size()) != num_machines) return false;
    std::vector<bool> seen(num_machines, false);
    for (const auto& op : job) {
      if (op.machine < 0 || op.machine >= num_machines || seen[op.machine])
        return false;
      seen[op.machine] = true;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

void check_seed(std::int64_t seed) {
  if (seed < 1 || seed >= kLcgM)
    throw Error(ErrorCode::invalid_seed,
                "seed " + std::to_string(seed) + " outside [1, 2^31 - 2]");
}

LcgDraw lcg_next(LcgState state) {
  const std::int64_t k = state.seed / kLcgB;
  std::int64_t next = kLcgA * (state.seed % kLcgB) - k * kLcgC;
  if (next < 0) next += kLcgM;
  return {LcgState{next},
          static_cast<double>(next) / static_cast<double>(kLcgM)};
}

LcgIntDraw uniform_int(LcgState state, std::int64_t lo, std::int64_t hi) {
  if (lo > hi)
    throw Error(ErrorCode::invalid_range,
                "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  const LcgDraw draw = lcg_next(state);
  const auto span = static_cast<double>(hi - lo + 1);
  auto value = lo + static_cast<std::int64_t>(std::floor(draw.unit * span));
  return {draw.state, std::min(value, hi)};
}

Instance generate_random(int jobs, int machines, std::int64_t time_seed,
                         std::int64_t machine_seed) {
  if (jobs < 1 || machines < 1)
    throw Error(ErrorCode::invalid_range, "jobs and machines must be >= 1");
  check_seed(time_seed);
  check_seed(machine_seed);

  Instance inst;
  inst.num_jobs = jobs;
  inst.num_machines = machines;
  inst.jobs.assign(jobs, std::vector<Operation>(machines));

  LcgState time_stream{time_seed};
  for (int i = 0; i < jobs; ++i) {
    for (int j = 0; j < machines; ++j) {
      const auto draw = uniform_int(time_stream, 1, 99);
      time_stream = draw.state;
      inst.jobs[i][j].duration = static_cast<int>(draw.value);
      inst.jobs[i][j].machine = j;
    }
  }

  LcgState machine_stream{machine_seed};
  for (int i = 0; i < jobs; ++i) {
    auto& row = inst.jobs[i];
    for (int j = 0; j < machines; ++j) {
      const auto draw = uniform_int(machine_stream, j, machines - 1);
      machine_stream = draw.state;
      std::swap(row[j].machine, row[static_cast<std::size_t>(draw.value)].machine);
    }
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Parsing. A line whose first token is not an integer is metadata and is
// skipped ("Times", "Nb of jobs, ...", comments). Numeric lines must be
// entirely numeric.

namespace {

struct NumericLine {
  int line_no = 0;
  std::vector<long long> values;
};

std::vector<NumericLine> numeric_lines(std::string_view text) {
  std::vector<NumericLine> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;

    NumericLine parsed{line_no, {}};
    bool metadata = false;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                                 line[i] == '\r' || line[i] == ','))
        ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
             line[j] != '\r' && line[j] != ',')
        ++j;
      std::string_view token = line.substr(i, j - i);
      long long value = 0;
      auto [ptr, ec] =
          std::from_chars(token.data(), token.data() + token.size(), value);
      const bool ok = ec == std::errc() && ptr == token.data() + token.size();
      if (!ok) {
        if (parsed.values.empty()) {
          metadata = true;
          break;
        }
        throw Error(ErrorCode::parse_error,
                    "line " + std::to_string(line_no) + ", column " +
                        std::to_string(i + 1) + ": expected an integer, got '" +
                        std::string(token) + "'");
      }
      parsed.values.push_back(value);
      i = j;
    }
    if (!metadata && !parsed.values.empty()) out.push_back(std::move(parsed));
    if (end == text.size()) break;
  }
  return out;
}

void read_header(const std::vector<NumericLine>& lines, int& jobs,
                 int& machines) {
  if (lines.empty())
    throw Error(ErrorCode::parse_error, "no header line with job/machine counts");
  const auto& header = lines.front();
  if (header.values.size() < 2)
    throw Error(ErrorCode::parse_error,
                "line " + std::to_string(header.line_no) +
                    ": header needs at least two integers");
  if (header.values[0] < 0 || header.values[1] < 1)
    throw Error(ErrorCode::parse_error,
                "line " + std::to_string(header.line_no) +
                    ": invalid job/machine counts");
  jobs = static_cast<int>(header.values[0]);
  machines = static_cast<int>(header.values[1]);
}

void check_duration(long long value, int line_no) {
  if (value < 1)
    throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) +
                                            ": duration must be >= 1");
}

Instance parse_taillard(const std::vector<NumericLine>& lines) {
  Instance inst;
  read_header(lines, inst.num_jobs, inst.num_machines);
  const int J = inst.num_jobs;
  const int M = inst.num_machines;
  if (static_cast<int>(lines.size()) < 1 + 2 * J)
    throw Error(ErrorCode::dimension_mismatch,
                "expected " + std::to_string(2 * J) +
                    " matrix rows after the header, found " +
                    std::to_string(lines.size() - 1));
  inst.jobs.assign(J, std::vector<Operation>(M));
  for (int i = 0; i < J; ++i) {
    const auto& times = lines[1 + i];
    const auto& order = lines[1 + J + i];
    for (const auto* row : {&times, &order}) {
      if (static_cast<int>(row->values.size()) != M)
        throw Error(ErrorCode::dimension_mismatch,
                    "line " + std::to_string(row->line_no) + ": expected " +
                        std::to_string(M) + " columns, found " +
                        std::to_string(row->values.size()));
    }
    for (int j = 0; j < M; ++j) {
      check_duration(times.values[j], times.line_no);
      const long long machine = order.values[j] - 1;
      if (machine < 0 || machine >= M)
        throw Error(ErrorCode::machine_index_out_of_range,
                    "line " + std::to_string(order.line_no) + ", entry " +
                        std::to_string(j + 1) + ": machine " +
                        std::to_string(order.values[j]));
      inst.jobs[i][j] = {static_cast<int>(machine),
                         static_cast<int>(times.values[j])};
    }
  }
  return inst;
}

Instance parse_orlib(const std::vector<NumericLine>& lines) {
  Instance inst;
  read_header(lines, inst.num_jobs, inst.num_machines);
  const int J = inst.num_jobs;
  const int M = inst.num_machines;
  if (static_cast<int>(lines.size()) < 1 + J)
    throw Error(ErrorCode::dimension_mismatch,
                "expected " + std::to_string(J) + " job lines, found " +
                    std::to_string(lines.size() - 1));
  inst.jobs.resize(J);
  for (int i = 0; i < J; ++i) {
    const auto& row = lines[1 + i];
    if (row.values.size() % 2 != 0)
      throw Error(ErrorCode::dimension_mismatch,
                  "line " + std::to_string(row.line_no) +
                      ": odd number of entries in machine/duration pairs");
    for (std::size_t k = 0; k < row.values.size(); k += 2) {
      const long long machine = row.values[k];
      if (machine < 0 || machine >= M)
        throw Error(ErrorCode::machine_index_out_of_range,
                    "line " + std::to_string(row.line_no) + ", pair " +
                        std::to_string(k / 2 + 1) + ": machine " +
                        std::to_string(machine));
      check_duration(row.values[k + 1], row.line_no);
      inst.jobs[i].push_back(
          {static_cast<int>(machine), static_cast<int>(row.values[k + 1])});
    }
  }
  return inst;
}

}  // namespace

InstanceFormat parse_format(std::string_view name) {
  if (name == "taillard") return InstanceFormat::taillard;
  if (name == "orlib") return InstanceFormat::orlib;
  throw Error(ErrorCode::invalid_config,
              "unknown instance format '" + std::string(name) + "'");
}

Instance parse_instance(std::string_view text, InstanceFormat format) {
  const auto lines = numeric_lines(text);
  Instance inst = format == InstanceFormat::taillard ? parse_taillard(lines)
                                                     : parse_orlib(lines);
  inst.validate();
  return inst;
}

Instance load_instance(const std::string& path, InstanceFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_instance(buffer.str(), format);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + std::string(e.what()));
  }
}

std::string serialize_instance(const Instance& instance, InstanceFormat format) {
  std::ostringstream out;
  out << instance.num_jobs << ' ' << instance.num_machines << '\n';
  if (format == InstanceFormat::orlib) {
    for (const auto& job : instance.jobs) {
      for (std::size_t k = 0; k < job.size(); ++k) {
        if (k) out << ' ';
        out << job[k].machine << ' ' << job[k].duration;
      }
      out << '\n';
    }
    return out.str();
  }

  for (const auto& job : instance.jobs)
    if (static_cast<int>(job.size()) != instance.num_machines)
      throw Error(ErrorCode::dimension_mismatch,
                  "taillard layout needs exactly M operations per job");
  auto write_matrix = [&](auto field) {
    for (const auto& job : instance.jobs) {
      for (std::size_t k = 0; k < job.size(); ++k) {
        if (k) out << ' ';
        out << field(job[k]);
      }
      out << '\n';
    }
  };
  write_matrix([](const Operation& op) { return op.duration; });
  write_matrix([](const Operation& op) { return op.machine + 1; });
  return out.str();
}

}  // namespace petrirl
