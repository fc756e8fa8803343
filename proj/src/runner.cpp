#include "gpata/runner.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace gpata::runner {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace {

std::string device_label(DeviceId id) { return id == kNone ? "NONE" : std::to_string(id); }

}  // namespace

void write_task_csv(std::ostream& out, Scheme scheme, const std::vector<engine::CycleResult>& cycles) {
  out << "cycle,scheme,task_id,device_id,e2e_delay_s,deadline_hit,reward_paid\n";
  for (const auto& c : cycles) {
    for (const auto& r : c.metrics.tasks) {
      out << c.metrics.cycle << ',' << to_string(scheme) << ',' << r.task_id << ','
          << device_label(r.device_id) << ',' << format_real(r.e2e_delay) << ','
          << (r.deadline_hit ? 1 : 0) << ',' << format_real(r.reward_paid) << '\n';
    }
  }
}

void write_device_csv(std::ostream& out, const std::vector<engine::CycleResult>& cycles) {
  out << "cycle,device_id,payoff,energy_j\n";
  for (const auto& c : cycles) {
    for (const auto& d : c.metrics.devices) {
      out << c.metrics.cycle << ',' << d.device_id << ',' << format_real(d.payoff) << ','
          << format_real(d.energy_cost) << '\n';
    }
  }
}

void write_controller_csv(std::ostream& out, const std::vector<engine::CycleResult>& cycles) {
  out << "cycle,alpha1,alpha2,budget,loss1,loss2,misses,admitted,admission_control\n";
  for (const auto& c : cycles) {
    const auto& t = c.controller;
    out << t.cycle << ',' << format_real(t.alpha1) << ',' << format_real(t.alpha2) << ','
        << format_real(t.budget) << ',' << format_real(t.loss1) << ',' << format_real(t.loss2)
        << ',' << t.misses << ',' << t.admitted << ',' << (t.admission_control ? 1 : 0) << '\n';
  }
}

void write_assignment_csv(std::ostream& out, const std::vector<engine::CycleResult>& cycles,
                          const ScenarioConfig& config) {
  out << "cycle,device_id,server_id,distance\n";
  for (const auto& c : cycles) {
    for (const auto& p : c.assignment_trace) {
      out << c.metrics.cycle << ',' << config.devices[p.device].state.id << ','
          << config.servers[p.server].id << ',' << format_real(p.distance) << '\n';
    }
  }
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::kNone: return "none";
    case SweepAxis::kDeadline: return "deadline";
    case SweepAxis::kPrivacy: return "privacy";
    case SweepAxis::kDevices: return "devices";
    case SweepAxis::kTasks: return "tasks";
  }
  return "none";
}

namespace {

double parse_double(std::string_view key, const std::string& s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw ConfigError(std::string(key) + ": '" + s + "' is not a number");
  }
  return v;
}

int parse_int(std::string_view key, const std::string& s) {
  int v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw ConfigError(std::string(key) + ": '" + s + "' is not an integer");
  }
  return v;
}

void check_value(SweepAxis axis, const std::string& v) {
  switch (axis) {
    case SweepAxis::kNone:
      break;
    case SweepAxis::kDeadline:
      if (!(parse_double("sweep.deadline", v) > 0.0) || !std::isfinite(parse_double("sweep.deadline", v))) {
        throw ConfigError("sweep.deadline: '" + v + "' must be a positive number of seconds");
      }
      break;
    case SweepAxis::kPrivacy: {
      const auto p = parse_privacy_preset(v);
      if (p == PrivacyPreset::kCustom) {
        throw ConfigError("sweep.privacy: expected high, medium or low");
      }
      break;
    }
    case SweepAxis::kDevices:
      if (parse_int("sweep.devices", v) < 1) {
        throw ConfigError("sweep.devices: '" + v + "' must be at least 1");
      }
      break;
    case SweepAxis::kTasks:
      if (parse_int("sweep.tasks", v) < 0) {
        throw ConfigError("sweep.tasks: '" + v + "' must be non-negative");
      }
      break;
  }
}

}  // namespace

Sweep parse_sweep(std::string_view text) {
  Sweep s;
  if (text.empty() || text == "none") return s;
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("sweep: expected <axis>=<v1,v2,...>");
  const auto axis = text.substr(0, eq);
  if (axis == "deadline") s.axis = SweepAxis::kDeadline;
  else if (axis == "privacy") s.axis = SweepAxis::kPrivacy;
  else if (axis == "devices") s.axis = SweepAxis::kDevices;
  else if (axis == "tasks") s.axis = SweepAxis::kTasks;
  else throw ConfigError("sweep: unknown axis '" + std::string(axis) + "'");

  std::stringstream list{std::string(text.substr(eq + 1))};
  for (std::string v; std::getline(list, v, ',');) {
    if (v.empty()) throw ConfigError("sweep: empty value");
    check_value(s.axis, v);
    s.values.push_back(v);
  }
  if (s.values.empty()) throw ConfigError("sweep: no values given");
  return s;
}

ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepAxis axis, const std::string& value) {
  check_value(axis, value);
  ScenarioConfig c = base;
  switch (axis) {
    case SweepAxis::kNone: break;
    case SweepAxis::kDeadline: c.deadline = parse_double("sweep.deadline", value); break;
    case SweepAxis::kPrivacy: apply_privacy_preset(c, parse_privacy_preset(value)); break;
    case SweepAxis::kDevices:
      regenerate_devices(c, parse_int("sweep.devices", value), kSweepLayoutSeed);
      break;
    case SweepAxis::kTasks: c.tasks.per_cycle = parse_int("sweep.tasks", value); break;
  }
  validate(c);
  return c;
}

void validate(const RunSpec& spec) {
  if (spec.schemes.empty()) throw ConfigError("scheme: at least one scheme required");
  if (spec.seeds.empty()) throw ConfigError("seed: at least one seed required");
  if (spec.out.empty()) throw ConfigError("out: output directory required");
  if (spec.cycles && *spec.cycles < 0) throw ConfigError("cycles: must be >= 0");
  if (spec.sweep.axis != SweepAxis::kNone && spec.sweep.values.empty()) {
    throw ConfigError("sweep: no values given");
  }
  for (const auto& v : spec.sweep.values) check_value(spec.sweep.axis, v);
}

std::string cell_stem(const Cell& cell, SweepAxis axis) {
  std::string stem = std::string(to_string(cell.scheme)) + "_s" + std::to_string(cell.seed);
  if (axis != SweepAxis::kNone && cell.sweep_value) {
    stem += "_" + std::string(to_string(axis)) + "-" + *cell.sweep_value;
  }
  return stem;
}

bool RunReport::all_ok() const {
  for (const auto& c : cells) {
    if (!c.ok) return false;
  }
  return true;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path.string() + ": cannot open for writing");
  f << body;
  if (!f) throw std::runtime_error(path.string() + ": write failed");
}

void run_cell(const RunSpec& spec, const ScenarioConfig& base, CellOutcome& outcome) {
  const Cell& cell = outcome.cell;
  ScenarioConfig config =
      cell.sweep_value ? apply_sweep(base, spec.sweep.axis, *cell.sweep_value) : base;
  config.seed = cell.seed;
  if (spec.cycles) config.cycles = *spec.cycles;
  if (spec.estimation) config.estimation = *spec.estimation;
  if (spec.loss_pairing) config.loss_pairing = *spec.loss_pairing;
  validate(config);

  // Cells already run concurrently, so each simulation stays serial.
  engine::SimulatorOptions options;
  options.policy = ExecutionPolicy::kSerial;
  const auto result = engine::run_scheme(config, cell.scheme, options);

  const std::string stem = cell_stem(cell, spec.sweep.axis);
  std::ostringstream tasks, devices, controller, assignments;
  write_task_csv(tasks, cell.scheme, result.cycles);
  write_device_csv(devices, result.cycles);
  write_controller_csv(controller, result.cycles);
  write_assignment_csv(assignments, result.cycles, config);
  write_file(spec.out / (stem + "_tasks.csv"), tasks.str());
  write_file(spec.out / (stem + "_devices.csv"), devices.str());
  write_file(spec.out / (stem + "_controller.csv"), controller.str());
  write_file(spec.out / (stem + "_assignments.csv"), assignments.str());
  outcome.summary = result.summary;
  outcome.ok = true;
}

}  // namespace

RunReport run(const RunSpec& spec, const ScenarioConfig& base) {
  validate(spec);
  std::filesystem::create_directories(spec.out);

  RunReport report;
  report.axis = spec.sweep.axis;
  std::vector<std::optional<std::string>> values;
  if (spec.sweep.axis == SweepAxis::kNone) {
    values.push_back(std::nullopt);
  } else {
    for (const auto& v : spec.sweep.values) values.push_back(v);
  }
  for (const auto& v : values) {
    for (Scheme s : spec.schemes) {
      for (std::uint64_t seed : spec.seeds) report.cells.push_back({{s, seed, v}, false, {}, {}});
    }
  }

  for_each_index(report.cells.size(), spec.policy, [&](std::size_t i) {
    auto& outcome = report.cells[i];
    try {
      run_cell(spec, base, outcome);
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = e.what();
    }
  });

  std::ostringstream summary;
  write_summary_csv(summary, report);
  write_file(spec.out / "summary.csv", summary.str());
  return report;
}

RunReport run(const RunSpec& spec) { return run(spec, load_scenario(spec.scenario)); }

void write_summary_csv(std::ostream& out, const RunReport& report) {
  const SweepAxis axis = report.axis;
  out << "scheme,seed,sweep_axis,sweep_value,status,cycles,tasks,hits,dhr,mean_e2e_delay_s,"
         "mean_device_payoff,total_energy_j,mean_iterations,converged_fraction\n";
  for (const auto& c : report.cells) {
    const auto& s = c.summary;
    out << to_string(c.cell.scheme) << ',' << c.cell.seed << ',' << to_string(axis) << ','
        << c.cell.sweep_value.value_or("") << ',' << (c.ok ? "ok" : "failed") << ',';
    if (c.ok) {
      out << s.cycles << ',' << s.tasks << ',' << s.hits << ',' << format_real(s.dhr) << ','
          << format_real(s.mean_e2e_delay) << ',' << format_real(s.mean_device_payoff) << ','
          << format_real(s.total_energy) << ',' << format_real(s.mean_iterations) << ','
          << format_real(s.converged_fraction);
    } else {
      out << ",,,,,,,,";
    }
    out << '\n';
  }
}

void print_report(std::ostream& out, const RunReport& report) {
  struct Acc {
    int cells = 0;
    double dhr = 0.0, delay = 0.0;
  };
  std::map<std::string, Acc> by_scheme;
  std::vector<std::string> order;
  int failed = 0;
  for (const auto& c : report.cells) {
    const std::string name(to_string(c.cell.scheme));
    if (!by_scheme.contains(name)) order.push_back(name);
    auto& acc = by_scheme[name];
    if (!c.ok) {
      ++failed;
      continue;
    }
    ++acc.cells;
    acc.dhr += c.summary.dhr;
    acc.delay += c.summary.mean_e2e_delay;
  }
  out << "completed " << report.cells.size() - static_cast<std::size_t>(failed) << " of "
      << report.cells.size() << " cells\n";
  for (const auto& name : order) {
    const auto& a = by_scheme[name];
    if (a.cells == 0) {
      out << "  " << name << ": no completed cells\n";
      continue;
    }
    out << "  " << name << ": mean DHR " << format_real(a.dhr / a.cells) << ", mean E2E delay "
        << format_real(a.delay / a.cells) << " s over " << a.cells << " cells\n";
  }
  for (const auto& c : report.cells) {
    if (!c.ok) out << "  FAILED " << cell_stem(c.cell, report.axis) << ": " << c.error << '\n';
  }
}

}  // namespace gpata::runner
