#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gpata/engine.hpp"
#include "gpata/runner.hpp"

using namespace gpata;
using namespace gpata::engine;

namespace {

// One city per server, one street with a handful of POIs near each server.
ScenarioConfig tiny_config(int devices, int servers) {
  ScenarioConfig c;
  std::vector<privacy::City> cities;
  for (int s = 0; s < servers; ++s) {
    const Point center{20.0 * s, 0.0};
    c.servers.push_back({s, center, {}});
    privacy::Street street{"s" + std::to_string(s), {}};
    for (int p = 0; p < 4; ++p) street.pois.push_back({{center.x + p, 1.0}, 1.0});
    cities.push_back({"c" + std::to_string(s), {street}});
  }
  c.hierarchy = privacy::LocationHierarchy(cities);
  for (int d = 0; d < devices; ++d) {
    DeviceSpec spec;
    spec.state.id = d;
    spec.state.cpu_freq = 2.0 + 0.25 * d;
    spec.state.cpu_usage = 0.1;
    spec.state.location = {20.0 * (d % servers) + d % 4, 1.0};
    spec.state.power_comp = 2.0;
    spec.state.power_trans_per_byte = 1e-6;
    c.devices.push_back(spec);
  }
  c.usage_jitter = 0.0;
  c.cycles = 3;
  c.seed = 11;
  return c;
}

std::string task_csv(const RunResult& r, Scheme s) {
  std::ostringstream out;
  runner::write_task_csv(out, s, r.cycles);
  runner::write_device_csv(out, r.cycles);
  runner::write_controller_csv(out, r.cycles);
  return out.str();
}

ScenarioConfig short_reference(int cycles) {
  auto c = make_reference_scenario();
  c.cycles = cycles;
  return c;
}

}  // namespace

TEST_CASE("one device, one task, generous deadline") {
  auto c = tiny_config(1, 1);
  c.tasks.per_cycle = 1;
  c.deadline = 100.0;
  c.cycles = 1;
  const auto r = run_scheme(c, Scheme::kGpata);
  const auto& m = r.cycles[0].metrics;
  REQUIRE(m.tasks.size() == 1);
  CHECK(m.dhr == 1.0);

  const Task t = generate_tasks(c, 0)[0];
  const auto& s = c.devices[0].state;
  const double compute = t.comp_complexity / (s.cpu_freq * (1.0 - s.cpu_usage));
  const double transfer = c.network.overhead +
                          c.network.latency_per_distance * distance(s.location, c.servers[0].location) +
                          t.output_volume / c.network.bandwidth;
  const double energy = s.power_comp * compute + s.power_trans_per_byte * t.output_volume;
  CHECK(m.tasks[0].compute_time == doctest::Approx(compute));
  CHECK(m.tasks[0].trans_time == doctest::Approx(transfer));
  CHECK(m.tasks[0].e2e_delay == doctest::Approx(compute + transfer));
  CHECK(m.tasks[0].energy == doctest::Approx(energy));
  // The lone task carries the whole budget.
  CHECK(m.tasks[0].reward_paid == doctest::Approx(c.initial_budget));
  CHECK(m.tasks[0].payoff == doctest::Approx(c.initial_budget / energy));
  CHECK(m.devices[0].payoff == doctest::Approx(m.tasks[0].payoff));
}

TEST_CASE("a vanishing deadline misses everything and raises the budget") {
  auto c = tiny_config(4, 2);
  c.tasks.per_cycle = 10;
  c.deadline = 1e-9;
  c.cycles = 2;
  Simulator sim(c, Scheme::kGpata);
  const auto first = sim.step();
  CHECK(first.metrics.dhr == 0.0);
  for (const auto& t : first.metrics.tasks) {
    CHECK(t.device_id == kNone);
    CHECK_FALSE(t.deadline_hit);
  }
  CHECK(first.controller.misses == 10);
  CHECK(first.controller.admission_control);
  CHECK(sim.controller().budget == doctest::Approx(c.initial_budget * c.beta));
  CHECK(sim.admitted_limit() == 9);
  const auto second = sim.step();
  CHECK(second.metrics.tasks.size() == 9);
  CHECK(second.controller.budget == doctest::Approx(c.initial_budget * c.beta));
  CHECK(sim.done());
  CHECK_THROWS_AS(sim.step(), std::logic_error);
}

TEST_CASE("execution queues tasks in claim order") {
  CycleAllocation a;
  DeviceState d;
  d.id = 7;
  d.cpu_freq = 2.0;
  d.cpu_usage = 0.5;
  d.power_comp = 1.0;
  a.states = {d};
  a.server_distance = {2.0};
  Task t0, t1, t2;
  t0.id = 0;
  t0.comp_complexity = 1.0;  // 1 s
  t0.output_volume = 0.0;
  t0.reward = 4.0;
  t1 = t0;
  t1.id = 1;
  t1.comp_complexity = 0.5;  // 0.5 s
  t2 = t0;
  t2.id = 2;
  a.tasks = {t0, t1, t2};
  a.decisions = {{0, 7, 0, 1, true}, {1, 7, 0, 0, false}, {2, kNone, -1, -1, false}};
  NetworkModel net{0.1, 1e6, 0.0};  // transfer 0.2 s
  const auto m = execute_allocation(a, 1.6, net);
  // Task 1 runs first: 0.5 + 0.2; task 0 waits 0.5, then 1 + 0.2.
  CHECK(m.tasks[1].queue_wait == 0.0);
  CHECK(m.tasks[1].e2e_delay == doctest::Approx(0.7));
  CHECK(m.tasks[0].queue_wait == doctest::Approx(0.5));
  CHECK(m.tasks[0].e2e_delay == doctest::Approx(1.7));
  CHECK_FALSE(m.tasks[0].deadline_hit);
  CHECK(m.tasks[1].deadline_hit);
  CHECK_FALSE(m.tasks[2].deadline_hit);
  CHECK(std::isinf(m.tasks[2].e2e_delay));
  CHECK(m.dhr == doctest::Approx(1.0 / 3.0));
  // Infeasible at claim time: no payoff even though it finished in time.
  CHECK(m.tasks[1].payoff == 0.0);
  CHECK(m.tasks[0].payoff == doctest::Approx(4.0 / 1.0));
  CHECK(m.devices[0].energy_cost == doctest::Approx(1.5));

  a.decisions[0].device = 99;
  CHECK_THROWS(execute_allocation(a, 1.0, net));
}

TEST_CASE("runs are deterministic and policy independent") {
  const auto c = short_reference(8);
  for (Scheme s : all_schemes()) {
    const auto a = run_scheme(c, s);
    const auto b = run_scheme(c, s);
    SimulatorOptions par;
    par.policy = ExecutionPolicy::kParallel;
    const auto p = run_scheme(c, s, par);
    CHECK(task_csv(a, s) == task_csv(b, s));
    CHECK(task_csv(a, s) == task_csv(p, s));
  }
}

TEST_CASE("accounting invariants across schemes") {
  const auto c = short_reference(10);
  std::vector<std::vector<Task>> streams;
  for (Scheme s : all_schemes()) {
    const auto r = run_scheme(c, s);
    std::vector<Task> stream;
    long long tasks = 0, hits = 0;
    for (const auto& cycle : r.cycles) {
      const auto& m = cycle.metrics;
      double per_task = 0.0, per_device = 0.0, device_payoff = 0.0, task_payoff = 0.0;
      for (std::size_t t = 0; t < m.tasks.size(); ++t) {
        const auto& rec = m.tasks[t];
        const auto& dec = cycle.allocation.decisions[t];
        per_task += rec.energy;
        task_payoff += rec.payoff;
        if (rec.device_id == kNone) CHECK_FALSE(rec.deadline_hit);
        if (!dec.feasible_at_claim) CHECK(rec.payoff == 0.0);
        if (rec.device_id != kNone) {
          CHECK(rec.e2e_delay ==
                doctest::Approx(rec.queue_wait + rec.compute_time + rec.trans_time));
        }
        hits += rec.deadline_hit ? 1 : 0;
      }
      for (const auto& d : m.devices) {
        per_device += d.energy_cost;
        device_payoff += d.payoff;
      }
      CHECK(per_device == doctest::Approx(per_task));
      CHECK(device_payoff == doctest::Approx(task_payoff));
      // Rewards of each cycle spend the budget exactly.
      double rewards = 0.0;
      for (const auto& t : cycle.allocation.tasks) rewards += t.reward;
      CHECK(std::abs(rewards - cycle.controller.budget) <= 1e-9 * cycle.controller.budget);
      tasks += static_cast<long long>(m.tasks.size());
      for (const auto& t : cycle.allocation.tasks) stream.push_back(t);
    }
    CHECK(r.summary.tasks == tasks);
    CHECK(r.summary.hits == hits);
    streams.push_back(stream);
  }
  // Every scheme saw the same tasks; only rewards may differ.
  for (const auto& s : streams) {
    REQUIRE(s.size() == streams[0].size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      CHECK(s[k].id == streams[0][k].id);
      CHECK(s[k].comp_complexity == streams[0][k].comp_complexity);
      CHECK(s[k].output_volume == streams[0][k].output_volume);
    }
  }
}

TEST_CASE("replayed allocations hit more deadlines as the deadline grows") {
  const auto c = short_reference(10);
  for (Scheme s : all_schemes()) {
    const auto r = run_scheme(c, s);
    std::vector<CycleAllocation> recorded;
    for (const auto& cycle : r.cycles) recorded.push_back(cycle.allocation);
    double previous = -1.0;
    for (double deadline : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const auto s2 = summarize(replay(recorded, deadline, c.network), c.devices.size(), s, c.seed);
      CHECK(s2.dhr >= previous);
      previous = s2.dhr;
    }
    // Replaying at the run's own deadline reproduces the run.
    const auto same = summarize(replay(recorded, c.deadline, c.network), c.devices.size(), s, c.seed);
    CHECK(same.hits == r.summary.hits);
  }
}

TEST_CASE("greedy max-reward: both devices want the richer task") {
  auto c = tiny_config(2, 1);
  c.tasks.per_cycle = 2;
  c.deadline = 100.0;
  c.cycles = 1;
  const auto r = run_scheme(c, Scheme::kGmxr);
  const auto& alloc = r.cycles[0].allocation;
  const std::size_t rich = alloc.tasks[0].reward > alloc.tasks[1].reward ? 0 : 1;
  CHECK(alloc.decisions[rich].round == 0);
  CHECK(alloc.decisions[1 - rich].round == 1);
  CHECK(r.cycles[0].metrics.dhr == 1.0);
}

TEST_CASE("top-down exhaustive search matches enumeration") {
  Rng rng(64);
  for (int rep = 0; rep < 200; ++rep) {
    TopDownProblem p;
    p.deadline = 1.0;
    for (int d = 0; d < 2; ++d) {
      p.predicted_compute.push_back({rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)});
      p.predicted_transfer.push_back({rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.3)});
    }
    // All 9 assignments of 2 tasks to {device 0, device 1, none}.
    int best = 3;
    for (int a = -1; a < 2; ++a) {
      for (int b = -1; b < 2; ++b) {
        int misses = 0;
        double load[2] = {0.0, 0.0};
        const int choice[2] = {a, b};
        for (int t = 0; t < 2; ++t) {
          if (choice[t] < 0) {
            ++misses;
            continue;
          }
          load[choice[t]] += p.predicted_compute[choice[t]][t];
          misses += load[choice[t]] + p.predicted_transfer[choice[t]][t] > p.deadline ? 1 : 0;
        }
        best = std::min(best, misses);
      }
    }
    const auto r = top_down_exhaustive(p);
    CHECK(r.predicted_misses == best);
    CHECK(top_down_objective(p, r.device_of, r.order).first == best);

    const auto g = top_down_greedy(p);
    CHECK(g.predicted_misses >= best);
    CHECK(g.order.size() == 2);
    // Greedy only assigns tasks it predicts to finish in time.
    for (int t = 0; t < 2; ++t) {
      if (g.device_of[t] == kNone) continue;
      double load = 0.0;
      for (int u : g.order) {
        if (g.device_of[u] != g.device_of[t]) continue;
        load += p.predicted_compute[g.device_of[t]][u];
        if (u == t) break;
      }
      CHECK(load + p.predicted_transfer[g.device_of[t]][t] <= p.deadline);
    }
  }
}

TEST_CASE("gpata broadcasts carry aggregates only and come in protocol order") {
  struct Check : dpfp::MessageSink {
    long long broadcasts = 0, claims = 0, failures = 0, order_errors = 0;
    std::tuple<int, int, int, int> last_broadcast{-1, -1, -1, -1};
    void on_broadcast(const dpfp::ServerBroadcast& m) override {
      ++broadcasts;
      failures += dpfp::audit_broadcast(m) ? 0 : 1;
      last_broadcast = {m.cycle, m.server, m.round, m.iteration};
    }
    void on_claim(const dpfp::ClaimMessage& m) override {
      ++claims;
      // A claim answers the broadcast of the same iteration.
      if (last_broadcast != std::tuple{m.cycle, m.server, m.round, m.iteration}) ++order_errors;
    }
  } sink;
  SimulatorOptions o;
  o.sink = &sink;
  o.policy = ExecutionPolicy::kParallel;
  run_scheme(short_reference(5), Scheme::kGpata, o);
  CHECK(sink.broadcasts > 0);
  CHECK(sink.claims > 0);
  CHECK(sink.failures == 0);
  CHECK(sink.order_errors == 0);
}

TEST_CASE("task streams") {
  const auto c = make_reference_scenario();
  const auto a = generate_tasks(c, 4);
  const auto b = generate_tasks(c, 4);
  const auto other = generate_tasks(c, 5);
  REQUIRE(a.size() == 30);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].comp_complexity == b[k].comp_complexity);
    CHECK(a[k].comp_complexity >= c.tasks.comp_complexity.lo);
    CHECK(a[k].comp_complexity <= c.tasks.comp_complexity.hi);
    CHECK(a[k].trans_complexity == doctest::Approx(a[k].output_volume / c.tasks.bytes_per_trans_unit));
  }
  CHECK(a[0].comp_complexity != other[0].comp_complexity);
}
