#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpata/dpfp.hpp"
#include "gpata/engine.hpp"
#include "gpata/runner.hpp"
#include "gpata/scenario.hpp"

namespace {

using namespace gpata;

// Counts broadcasts that fail the decision-privacy audit and optionally logs
// every message as one JSON object per line.
class AuditingSink : public dpfp::MessageSink {
 public:
  explicit AuditingSink(std::ostream* log) : log_(log) {}
  void on_broadcast(const dpfp::ServerBroadcast& msg) override {
    const auto j = dpfp::to_json(msg);
    ++broadcasts_;
    if (!dpfp::audit_broadcast(j)) ++violations_;
    if (log_) *log_ << j.dump() << '\n';
  }
  void on_claim(const dpfp::ClaimMessage& msg) override {
    ++claims_;
    if (log_) *log_ << dpfp::to_json(msg).dump() << '\n';
  }
  long long broadcasts() const { return broadcasts_; }
  long long claims() const { return claims_; }
  long long violations() const { return violations_; }

 private:
  std::ostream* log_;
  long long broadcasts_ = 0, claims_ = 0, violations_ = 0;
};

int run_grid(const std::string& scenario, const std::vector<std::string>& schemes,
             const std::vector<std::uint64_t>& seeds, const std::string& out,
             const std::string& sweep, int cycles, const std::string& estimation,
             const std::string& pairing, bool serial) {
  runner::RunSpec spec;
  spec.scenario = scenario;
  for (const auto& s : schemes) spec.schemes.push_back(parse_scheme(s));
  if (spec.schemes.empty()) spec.schemes = all_schemes();
  spec.seeds = seeds;
  if (spec.seeds.empty()) spec.seeds = {1};
  spec.out = out;
  spec.sweep = runner::parse_sweep(sweep);
  if (cycles >= 0) spec.cycles = cycles;
  if (!estimation.empty()) spec.estimation = parse_estimation(estimation);
  if (!pairing.empty()) spec.loss_pairing = parse_loss_pairing(pairing);
  spec.policy = serial ? ExecutionPolicy::kSerial : ExecutionPolicy::kParallel;
  const auto report = runner::run(spec);
  runner::print_report(std::cout, report);
  return report.all_ok() ? 0 : 1;
}

int audit(const std::string& scenario, std::uint64_t seed, int cycles, const std::string& log_path) {
  ScenarioConfig config = load_scenario(scenario);
  config.seed = seed;
  if (cycles >= 0) config.cycles = cycles;
  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path, std::ios::binary);
    if (!log) throw std::runtime_error(log_path + ": cannot open for writing");
  }
  AuditingSink sink(log_path.empty() ? nullptr : &log);
  engine::SimulatorOptions options;
  options.sink = &sink;
  engine::run_scheme(config, Scheme::kGpata, options);
  std::cout << "broadcasts " << sink.broadcasts() << ", claims " << sink.claims()
            << ", audit violations " << sink.violations() << '\n';
  return sink.violations() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-aware task allocation simulator for social-sensing edge computing"};
  app.require_subcommand(0, 1);

  std::string scenario, out = "results", sweep, estimation, pairing;
  std::vector<std::string> schemes;
  std::vector<std::uint64_t> seeds;
  int cycles = -1;
  bool validate_only = false, serial = false;
  app.add_option("--scenario", scenario, "Scenario JSON file");
  app.add_option("--scheme", schemes,
                 "Allocation scheme (repeatable): gpata, bgta, cog, gmxr, tda, random; default all")
      ->allow_extra_args(false);
  app.add_option("--seed", seeds, "Run seed (repeatable); default 1")->allow_extra_args(false);
  app.add_option("--cycles", cycles, "Override the number of sensing cycles");
  app.add_option("--sweep", sweep, "Sweep <axis>=<v1,v2,...> with axis deadline|privacy|devices|tasks");
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_option("--estimation", estimation, "conservative or anchor");
  app.add_option("--loss-pairing", pairing, "literal or swapped");
  app.add_flag("--validate", validate_only, "Parse and check the scenario, then exit");
  app.add_flag("--serial", serial, "Run grid cells one after another");

  auto* gen = app.add_subcommand("gen-reference", "Write the built-in reference scenario");
  std::string gen_out = "scenarios/reference.json";
  std::uint64_t layout_seed = 2021;
  gen->add_option("--out", gen_out, "Destination file")->capture_default_str();
  gen->add_option("--layout-seed", layout_seed, "Seed for street and device placement")
      ->capture_default_str();

  auto* aud = app.add_subcommand("audit", "Run gpata and audit every server broadcast");
  std::string aud_scenario, log_path;
  std::uint64_t aud_seed = 1;
  int aud_cycles = -1;
  aud->add_option("--scenario", aud_scenario, "Scenario JSON file")->required();
  aud->add_option("--seed", aud_seed, "Run seed")->capture_default_str();
  aud->add_option("--cycles", aud_cycles, "Override the number of sensing cycles");
  aud->add_option("--message-log", log_path, "Write every broadcast and claim as JSON lines");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      save_scenario(make_reference_scenario(layout_seed), gen_out);
      std::cout << "wrote " << gen_out << '\n';
      return 0;
    }
    if (aud->parsed()) return audit(aud_scenario, aud_seed, aud_cycles, log_path);
    if (scenario.empty()) {
      std::cerr << "error: --scenario is required\n";
      return 2;
    }
    if (validate_only) {
      const auto config = load_scenario(scenario);
      std::cout << scenario << ": ok (" << config.devices.size() << " devices, "
                << config.servers.size() << " servers, " << config.tasks.per_cycle
                << " tasks per cycle, " << config.cycles << " cycles)\n";
      return 0;
    }
    return run_grid(scenario, schemes, seeds, out, sweep, cycles, estimation, pairing, serial);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
