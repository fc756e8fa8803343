#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "gpata/dpfp.hpp"
#include "gpata/dra.hpp"
#include "gpata/game.hpp"
#include "gpata/model.hpp"
#include "gpata/parallel.hpp"
#include "gpata/privacy.hpp"
#include "gpata/scenario.hpp"
#include "gpata/ulb.hpp"

namespace gpata::engine {

// Everything about a cycle that does not depend on the allocation scheme:
// true device states, privacy profiles, disclosed views, server beliefs,
// device-to-server groups and the generated task stream.
struct CycleInputs {
  int cycle = 0;
  std::vector<DeviceState> states;  // roster order
  std::vector<privacy::PrivacyProfile> profiles;
  std::vector<privacy::DisclosedView> views;
  std::vector<privacy::Estimates> capacity;  // server-side f and u estimates
  ulb::Assignment groups;                    // device index -> server index
  std::vector<double> server_distance;       // true distance to own server
  std::vector<double> estimated_distance;    // estimated distance to own server
  std::vector<Task> generated;               // full task stream of the cycle
};

CycleInputs prepare_cycle(const ScenarioConfig& config, int cycle,
                          ExecutionPolicy policy = ExecutionPolicy::kSerial);

std::vector<Task> generate_tasks(const ScenarioConfig& config, int cycle);

// One allocation decision; claim_order is the execution order on the device.
struct Decision {
  TaskId task = 0;
  DeviceId device = kNone;
  int round = -1;
  int claim_order = -1;
  bool feasible_at_claim = false;
};

// Allocation of one cycle, recorded so it can be replayed under other
// deadlines.
struct CycleAllocation {
  int cycle = 0;
  std::vector<Task> tasks;           // admitted tasks with their rewards
  std::vector<DeviceState> states;   // true states used for execution
  std::vector<double> server_distance;
  std::vector<Decision> decisions;   // one per admitted task, task order
};

// Executes an allocation on true device state. Tasks run sequentially on each
// device in claim order; e2e delay = queue wait + compute + transfer.
CycleMetrics execute_allocation(const CycleAllocation& allocation, double deadline,
                                const NetworkModel& network);

struct ControllerTrace {
  int cycle = 0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double budget = 0.0;
  double loss1 = 0.0;  // loss that updated alpha1
  double loss2 = 0.0;
  int misses = 0;
  int admitted = 0;
  bool admission_control = false;
};

struct NegotiationStats {
  int negotiations = 0;
  int converged = 0;
  long long iterations = 0;
  int max_iterations = 0;
};

struct CycleResult {
  CycleMetrics metrics;
  CycleAllocation allocation;
  ControllerTrace controller;
  std::vector<ulb::Pick> assignment_trace;
  NegotiationStats negotiation;
};

struct SimulatorOptions {
  ExecutionPolicy policy = ExecutionPolicy::kSerial;
  dpfp::MessageSink* sink = nullptr;  // receives gpata broadcasts and claims
};

// Sensing-cycle loop for one scheme. Schemes share everything except the
// allocation stage; only gpata runs the reward controller, the others keep
// the initial weights and budget.
class Simulator {
 public:
  Simulator(ScenarioConfig config, Scheme scheme, SimulatorOptions options = {});

  bool done() const { return next_cycle_ >= config_.cycles; }
  int next_cycle() const { return next_cycle_; }
  CycleResult step();

  const dra::RewardWeights& controller() const { return weights_; }
  int admitted_limit() const { return admitted_limit_; }
  const ScenarioConfig& config() const { return config_; }

 private:
  ScenarioConfig config_;
  Scheme scheme_;
  SimulatorOptions options_;
  dra::RewardWeights weights_;
  int admitted_limit_ = 0;
  int next_cycle_ = 0;
  // Congestion estimate per (server index, task slot), carried across cycles.
  std::map<std::pair<std::size_t, std::size_t>, double> congestion_;
};

struct RunSummary {
  Scheme scheme = Scheme::kGpata;
  std::uint64_t seed = 0;
  int cycles = 0;
  long long tasks = 0;
  long long hits = 0;
  double dhr = 0.0;
  double mean_e2e_delay = 0.0;      // over tasks that were executed
  double mean_device_payoff = 0.0;  // run total per device, averaged over devices
  double total_energy = 0.0;
  double mean_iterations = 0.0;     // per negotiation
  double converged_fraction = 0.0;  // of negotiations
};

struct RunResult {
  std::vector<CycleResult> cycles;
  RunSummary summary;
};

RunResult run_scheme(const ScenarioConfig& config, Scheme scheme,
                     SimulatorOptions options = {});

RunSummary summarize(const std::vector<CycleMetrics>& cycles, std::size_t device_count,
                     Scheme scheme, std::uint64_t seed);

// Re-executes recorded allocations under another deadline.
std::vector<CycleMetrics> replay(const std::vector<CycleAllocation>& allocations,
                                 double deadline, const NetworkModel& network);

// --- allocation building blocks, exposed for tests --------------------------

// One local game: devices of a server and the tasks routed to it.
struct GroupGame {
  std::vector<std::size_t> devices;  // roster indices
  std::vector<std::size_t> tasks;    // indices into the admitted task list
};

// Top-down allocation on worst-case estimates. Exhaustive over every
// (device or unassigned) choice per task when devices x tasks <= bound,
// otherwise regret-based greedy. Returns for each task the chosen device
// (index into predicted rows) or kNone, and the order of assignment.
struct TopDownProblem {
  // predicted_compute[d][t] and predicted_transfer[d][t], seconds
  std::vector<std::vector<double>> predicted_compute;
  std::vector<std::vector<double>> predicted_transfer;
  double deadline = 1.0;
};

struct TopDownResult {
  std::vector<int> device_of;   // per task
  std::vector<int> order;       // task indices in assignment order
  int predicted_misses = 0;
  double predicted_delay = 0.0;  // sum over assigned tasks
};

// Predicted (misses, summed delay of assigned tasks) when each device runs its
// tasks in `order`.
std::pair<int, double> top_down_objective(const TopDownProblem& p, const std::vector<int>& device_of,
                                          const std::vector<int>& order);
TopDownResult top_down_exhaustive(const TopDownProblem& p);
TopDownResult top_down_greedy(const TopDownProblem& p);

}  // namespace gpata::engine
