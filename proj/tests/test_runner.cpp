#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "gpata/runner.hpp"

using namespace gpata;
using namespace gpata::runner;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("gpata_runner_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

ScenarioConfig small_reference() {
  auto c = make_reference_scenario();
  c.cycles = 4;
  return c;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(1.0 / 3.0) == "0.333333333");
  CHECK(format_real(123456789012.0) == "1.23456789e+11");
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_real(0.0) == "0");
}

TEST_CASE("sweep parsing") {
  auto s = parse_sweep("deadline=0.5,1,2");
  CHECK(s.axis == SweepAxis::kDeadline);
  CHECK(s.values == std::vector<std::string>{"0.5", "1", "2"});
  CHECK(parse_sweep("").axis == SweepAxis::kNone);
  CHECK(parse_sweep("privacy=high,low").values.size() == 2);
  CHECK(parse_sweep("devices=5,30").axis == SweepAxis::kDevices);
  CHECK(parse_sweep("tasks=0,10").axis == SweepAxis::kTasks);
  CHECK_THROWS_AS(parse_sweep("speed=1"), ConfigError);
  CHECK_THROWS_AS(parse_sweep("deadline=-1"), ConfigError);
  CHECK_THROWS_AS(parse_sweep("deadline=abc"), ConfigError);
  CHECK_THROWS_AS(parse_sweep("privacy=custom"), ConfigError);
  CHECK_THROWS_AS(parse_sweep("devices=0"), ConfigError);
  CHECK_THROWS_AS(parse_sweep("tasks=1.5"), ConfigError);
  CHECK_THROWS_AS(parse_sweep("deadline="), ConfigError);
  CHECK_THROWS_AS(parse_sweep("deadline"), ConfigError);

  const auto base = small_reference();
  CHECK(apply_sweep(base, SweepAxis::kDeadline, "3.5").deadline == 3.5);
  CHECK(apply_sweep(base, SweepAxis::kTasks, "12").tasks.per_cycle == 12);
  CHECK(apply_sweep(base, SweepAxis::kDevices, "40").devices.size() == 40);
  const auto high = apply_sweep(base, SweepAxis::kPrivacy, "high");
  for (const auto& d : high.devices) CHECK(d.privacy == privacy::PrivacyProfile{3, 3, 3});
}

TEST_CASE("cell stems are a function of scheme, seed and sweep value") {
  CHECK(cell_stem({Scheme::kGpata, 3, std::nullopt}, SweepAxis::kNone) == "gpata_s3");
  CHECK(cell_stem({Scheme::kTda, 1, "1.5"}, SweepAxis::kDeadline) == "tda_s1_deadline-1.5");
}

TEST_CASE("grid without sweep writes one file set per cell and a summary") {
  RunSpec spec;
  spec.schemes = {Scheme::kGpata, Scheme::kRandom};
  spec.seeds = {1, 2};
  spec.out = fresh_dir("grid");
  const auto report = run(spec, small_reference());
  CHECK(report.all_ok());
  REQUIRE(report.cells.size() == 4);
  std::set<std::string> files;
  for (const auto& e : fs::directory_iterator(spec.out)) files.insert(e.path().filename().string());
  CHECK(files.size() == 4 * 4 + 1);
  CHECK(files.contains("summary.csv"));
  CHECK(files.contains("gpata_s2_tasks.csv"));
  CHECK(files.contains("random_s1_devices.csv"));

  const auto summary = lines(slurp(spec.out / "summary.csv"));
  CHECK(summary.size() == 5);
  const auto tasks = lines(slurp(spec.out / "gpata_s1_tasks.csv"));
  CHECK(tasks[0] == "cycle,scheme,task_id,device_id,e2e_delay_s,deadline_hit,reward_paid");
  CHECK(tasks.size() == 1 + 4 * 30);
  const auto devices = lines(slurp(spec.out / "gpata_s1_devices.csv"));
  CHECK(devices[0] == "cycle,device_id,payoff,energy_j");
  CHECK(devices.size() == 1 + 4 * 15);

  std::ostringstream report_text;
  print_report(report_text, report);
  CHECK(report_text.str().find("completed 4 of 4 cells") != std::string::npos);
  CHECK(report_text.str().find("gpata: mean DHR") != std::string::npos);
  fs::remove_all(spec.out);
}

TEST_CASE("deadline sweep yields one summary row per value and scheme") {
  RunSpec spec;
  spec.schemes = {Scheme::kGpata, Scheme::kGmxr};
  spec.seeds = {5};
  spec.out = fresh_dir("sweep");
  spec.sweep = parse_sweep("deadline=0.5,1,2,4,8");
  const auto report = run(spec, small_reference());
  CHECK(report.all_ok());
  const auto summary = lines(slurp(spec.out / "summary.csv"));
  REQUIRE(summary.size() == 1 + 10);
  int gpata_rows = 0;
  for (const auto& l : summary) gpata_rows += l.rfind("gpata,", 0) == 0 ? 1 : 0;
  CHECK(gpata_rows == 5);
  CHECK(fs::exists(spec.out / "gmxr_s5_deadline-8_tasks.csv"));
  fs::remove_all(spec.out);
}

TEST_CASE("identical specs give byte-identical outputs, serial or parallel") {
  RunSpec spec;
  spec.schemes = all_schemes();
  spec.seeds = {1, 2};
  spec.sweep = parse_sweep("privacy=high,low");
  spec.out = fresh_dir("det_a");
  run(spec, small_reference());
  RunSpec again = spec;
  again.out = fresh_dir("det_b");
  again.policy = ExecutionPolicy::kSerial;
  run(again, small_reference());
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(spec.out)) {
    const auto twin = again.out / e.path().filename();
    REQUIRE(fs::exists(twin));
    CHECK(slurp(e.path()) == slurp(twin));
    ++compared;
  }
  CHECK(compared == 6 * 2 * 2 * 4 + 1);
  fs::remove_all(spec.out);
  fs::remove_all(again.out);
}

TEST_CASE("failed cells show up in the report and the summary") {
  RunSpec spec;
  spec.schemes = {Scheme::kGpata};
  spec.seeds = {1};
  spec.out = fresh_dir("fail");
  spec.sweep = parse_sweep("devices=3,20");
  auto report = run(spec, small_reference());
  CHECK(report.all_ok());

  // Mark one cell as failed after the fact.
  report.cells[0].ok = false;
  report.cells[0].error = "boom";
  std::ostringstream text;
  print_report(text, report);
  CHECK(text.str().find("completed 1 of 2 cells") != std::string::npos);
  CHECK(text.str().find("FAILED gpata_s1_devices-3: boom") != std::string::npos);
  std::ostringstream csv;
  write_summary_csv(csv, report);
  CHECK(csv.str().find("failed") != std::string::npos);
  fs::remove_all(spec.out);
}

TEST_CASE("run spec validation") {
  RunSpec spec;
  spec.out = "x";
  spec.seeds = {1};
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec.schemes = {Scheme::kGpata};
  spec.seeds.clear();
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec.seeds = {1};
  CHECK_NOTHROW(validate(spec));
  spec.cycles = -2;
  CHECK_THROWS_AS(validate(spec), ConfigError);
}
