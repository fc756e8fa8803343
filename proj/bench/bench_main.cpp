// Serial vs OpenMP timings for the data-parallel kernels. Each pair is also
// checked for identical output.
// Usage: gpata_bench [repetitions]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "gpata/dpfp.hpp"
#include "gpata/engine.hpp"
#include "gpata/parallel.hpp"
#include "gpata/rng.hpp"
#include "gpata/scenario.hpp"

using namespace gpata;

namespace {

using Clock = std::chrono::steady_clock;

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

bool report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-34s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  %s\n", name, serial,
              parallel, serial / parallel, same ? "identical" : "MISMATCH");
  return same;
}

game::GameInstance random_game(std::size_t devices, std::size_t tasks) {
  Rng rng(3);
  game::GameInstance g;
  for (std::size_t i = 0; i < tasks; ++i) g.rewards.push_back(rng.uniform(1.0, 20.0));
  for (std::size_t j = 0; j < devices; ++j) {
    g.scores.push_back(rng.uniform(0.05, 4.0));
    std::vector<double> e(tasks);
    std::vector<std::uint8_t> f(tasks);
    for (std::size_t i = 0; i < tasks; ++i) {
      e[i] = rng.uniform(0.2, 5.0);
      f[i] = rng.bernoulli(0.9) ? 1 : 0;
    }
    g.energy.push_back(std::move(e));
    g.feasible.push_back(std::move(f));
  }
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  std::printf("OpenMP threads: %d, repetitions: %d\n", max_threads(), reps);
  bool ok = true;

  {
    auto config = make_reference_scenario();
    regenerate_devices(config, 20000, 7);
    engine::CycleInputs s, p;
    const double ts = best_of(reps, [&] { s = engine::prepare_cycle(config, 0, ExecutionPolicy::kSerial); });
    const double tp = best_of(reps, [&] { p = engine::prepare_cycle(config, 0, ExecutionPolicy::kParallel); });
    ok &= report("cycle setup + ULB, X=20000", ts, tp,
                 s.groups.server_of == p.groups.server_of && s.capacity.size() == p.capacity.size());
  }

  {
    const auto g = random_game(400, 400);
    dpfp::NegotiationParams params;
    params.max_iterations = 20;
    dpfp::NegotiationResult s, p;
    const double ts = best_of(reps, [&] { s = dpfp::negotiate(g, {}, params, {}); });
    params.policy = ExecutionPolicy::kParallel;
    const double tp = best_of(reps, [&] { p = dpfp::negotiate(g, {}, params, {}); });
    ok &= report("negotiation, 400 x 400", ts, tp,
                 s.winners == p.winners && s.iterations == p.iterations);
  }

  {
    auto config = make_reference_scenario();
    regenerate_devices(config, 400, 7);
    config.tasks.per_cycle = 300;
    config.cycles = 10;
    engine::RunResult s, p;
    const double ts = best_of(reps, [&] { s = engine::run_scheme(config, Scheme::kGpata); });
    const double tp = best_of(reps, [&] {
      p = engine::run_scheme(config, Scheme::kGpata, {ExecutionPolicy::kParallel, nullptr});
    });
    ok &= report("gpata run, 400 devices, 10 cycles", ts, tp,
                 s.summary.hits == p.summary.hits &&
                     s.summary.mean_device_payoff == p.summary.mean_device_payoff);
  }

  return ok ? 0 : 1;
}
