#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gpata/engine.hpp"
#include "gpata/scenario.hpp"

namespace gpata::runner {

// Floats at 9 significant digits, infinities as "inf".
std::string format_real(double v);

// CSV writers. Column order is fixed.
void write_task_csv(std::ostream& out, Scheme scheme, const std::vector<engine::CycleResult>& cycles);
void write_device_csv(std::ostream& out, const std::vector<engine::CycleResult>& cycles);
void write_controller_csv(std::ostream& out, const std::vector<engine::CycleResult>& cycles);
void write_assignment_csv(std::ostream& out, const std::vector<engine::CycleResult>& cycles,
                          const ScenarioConfig& config);

enum class SweepAxis { kNone, kDeadline, kPrivacy, kDevices, kTasks };

std::string_view to_string(SweepAxis a);

struct Sweep {
  SweepAxis axis = SweepAxis::kNone;
  std::vector<std::string> values;  // as given on the command line
};

// Parses "<axis>=<v1,v2,...>"; throws ConfigError on an unknown axis or a value
// that is invalid for it.
Sweep parse_sweep(std::string_view text);

// Devices sweeps draw rosters from this layout seed so a cell depends only on
// (scheme, seed, sweep value).
inline constexpr std::uint64_t kSweepLayoutSeed = 2021;

// Applies one sweep value to a copy of the base scenario.
ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepAxis axis, const std::string& value);

struct RunSpec {
  std::filesystem::path scenario;
  std::vector<Scheme> schemes;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out;
  Sweep sweep;
  std::optional<int> cycles;
  std::optional<EstimationMode> estimation;
  std::optional<dra::LossPairing> loss_pairing;
  ExecutionPolicy policy = ExecutionPolicy::kParallel;
};

void validate(const RunSpec& spec);

struct Cell {
  Scheme scheme = Scheme::kGpata;
  std::uint64_t seed = 0;
  std::optional<std::string> sweep_value;
};

// File stem shared by a cell's CSVs, e.g. "gpata_s3_deadline-1.5".
std::string cell_stem(const Cell& cell, SweepAxis axis);

struct CellOutcome {
  Cell cell;
  bool ok = false;
  std::string error;
  engine::RunSummary summary;
};

struct RunReport {
  SweepAxis axis = SweepAxis::kNone;
  std::vector<CellOutcome> cells;  // grid order: sweep value, scheme, seed
  bool all_ok() const;
};

// Runs the scheme x seed x sweep grid against an already loaded scenario and
// writes per-cell CSVs plus summary.csv into spec.out.
RunReport run(const RunSpec& spec, const ScenarioConfig& base);
// Loads spec.scenario first.
RunReport run(const RunSpec& spec);

void write_summary_csv(std::ostream& out, const RunReport& report);
// Per-scheme mean DHR and delay over completed cells, plus failures.
void print_report(std::ostream& out, const RunReport& report);

}  // namespace gpata::runner
