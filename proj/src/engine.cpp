#include "gpata/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <variant>

#include "gpata/rng.hpp"

namespace gpata::engine {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Pricing needs a strictly positive energy cost.
constexpr double kMinEnergy = 1e-9;

std::uint64_t u64(long long v) { return static_cast<std::uint64_t>(v); }

}  // namespace

std::vector<Task> generate_tasks(const ScenarioConfig& config, int cycle) {
  const auto& g = config.tasks;
  Rng rng = Rng::derive(config.seed, "tasks", u64(cycle));
  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(g.per_cycle));
  for (int k = 0; k < g.per_cycle; ++k) {
    Task t;
    t.id = k;
    t.comp_complexity = rng.uniform(g.comp_complexity.lo, g.comp_complexity.hi);
    t.input_volume = rng.uniform(g.input_volume.lo, g.input_volume.hi);
    t.output_volume = rng.uniform(g.output_volume.lo, g.output_volume.hi);
    t.trans_complexity = t.output_volume / g.bytes_per_trans_unit;
    t.algorithm_label = "analytics";
    t.data_type_label = "frame";
    tasks.push_back(std::move(t));
  }
  return tasks;
}

CycleInputs prepare_cycle(const ScenarioConfig& config, int cycle, ExecutionPolicy policy) {
  CycleInputs in;
  in.cycle = cycle;
  const std::size_t n = config.devices.size();
  in.states.resize(n);
  in.profiles.resize(n);
  in.views.resize(n);
  in.capacity.resize(n);
  const privacy::GlobalBounds bounds{config.freq_max};

  for_each_index(n, policy, [&](std::size_t d) {
    const auto& spec = config.devices[d];
    const auto id = u64(spec.state.id);
    DeviceState state = spec.state;
    if (config.usage_jitter > 0.0) {
      Rng rng = Rng::derive(config.seed, "state", u64(cycle), id);
      const double drift = rng.uniform(-config.usage_jitter, config.usage_jitter);
      state.cpu_usage = std::clamp(spec.state.cpu_usage + drift, 0.0, 1.0);
    }
    privacy::PrivacyProfile profile = spec.privacy;
    if (config.privacy_preset == PrivacyPreset::kMedium) {
      Rng rng = Rng::derive(config.seed, "privacy", u64(cycle), id);
      const int level = static_cast<int>(rng.below(privacy::kMaxLevel + 1));
      profile = {level, level, level};
    }
    in.states[d] = state;
    in.profiles[d] = profile;
    in.views[d] = privacy::cloak(state, profile, config.hierarchy, bounds);
    if (config.estimation == EstimationMode::kConservative) {
      in.capacity[d] = privacy::estimate_conservative(in.views[d], Point{});
    } else {
      Rng rng = Rng::derive(config.seed, "capacity", u64(cycle), id);
      in.capacity[d] = privacy::estimate_anchor(in.views[d], Point{}, config.anchor_samples, rng);
    }
  });

  const auto matrix = ulb::distance_matrix(in.views, in.capacity, config.servers, policy);
  in.groups = ulb::balance(matrix, policy);

  in.server_distance.resize(n);
  in.estimated_distance.resize(n);
  for_each_index(n, policy, [&](std::size_t d) {
    const Point server = config.servers[in.groups.server_of[d]].location;
    in.server_distance[d] = distance(in.states[d].location, server);
    if (config.estimation == EstimationMode::kConservative) {
      in.estimated_distance[d] = privacy::estimate_conservative(in.views[d], server).distance;
    } else {
      Rng rng = Rng::derive(config.seed, "distance", u64(cycle), u64(config.devices[d].state.id));
      in.estimated_distance[d] =
          privacy::estimate_anchor(in.views[d], server, config.anchor_samples, rng).distance;
    }
  });

  in.generated = generate_tasks(config, cycle);
  return in;
}

// --- execution --------------------------------------------------------------

CycleMetrics execute_allocation(const CycleAllocation& a, double deadline,
                                const NetworkModel& network) {
  if (a.decisions.size() != a.tasks.size()) {
    throw std::invalid_argument("execute_allocation: one decision per task required");
  }
  CycleMetrics m;
  m.cycle = a.cycle;
  m.tasks.resize(a.tasks.size());
  m.devices.resize(a.states.size());

  std::vector<std::vector<std::pair<int, std::size_t>>> queue(a.states.size());
  for (std::size_t t = 0; t < a.tasks.size(); ++t) {
    auto& rec = m.tasks[t];
    rec.task_id = a.tasks[t].id;
    rec.device_id = kNone;
    rec.e2e_delay = kInf;
    rec.deadline_hit = false;
    const auto& dec = a.decisions[t];
    if (dec.device == kNone) continue;
    const auto it = std::find_if(a.states.begin(), a.states.end(),
                                 [&](const DeviceState& s) { return s.id == dec.device; });
    if (it == a.states.end()) {
      throw std::invalid_argument("execute_allocation: unknown device " +
                                  std::to_string(dec.device));
    }
    queue[static_cast<std::size_t>(it - a.states.begin())].push_back({dec.claim_order, t});
  }

  for (std::size_t d = 0; d < a.states.size(); ++d) {
    const auto& state = a.states[d];
    auto& dev = m.devices[d];
    dev.device_id = state.id;
    auto& q = queue[d];
    std::sort(q.begin(), q.end());
    double clock = 0.0;
    for (const auto& [order, t] : q) {
      const Task& task = a.tasks[t];
      auto& rec = m.tasks[t];
      rec.device_id = state.id;
      rec.queue_wait = clock;
      rec.compute_time = compute_time(task.comp_complexity, state.cpu_freq, state.cpu_usage);
      rec.trans_time = network.transfer_time(task.output_volume, a.server_distance[d]);
      rec.e2e_delay = rec.queue_wait + rec.compute_time + rec.trans_time;
      rec.deadline_hit = deadline_indicator(rec.e2e_delay, deadline) == 0;
      const double rate = rec.trans_time > 0.0 ? task.output_volume / rec.trans_time : 0.0;
      // A saturated device burns the whole cycle without finishing.
      const double busy = std::isinf(rec.compute_time) ? deadline : rec.compute_time;
      rec.energy = edge_cost(state, busy, rec.trans_time, rate);
      if (a.decisions[t].feasible_at_claim) {
        // Sole winner: its share of the claimant score sum is 1.
        rec.payoff = task.reward / std::max(rec.energy, kMinEnergy);
        rec.reward_paid = task.reward;
      }
      clock += rec.compute_time;
      dev.payoff += rec.payoff;
      dev.energy_cost += rec.energy;
    }
  }
  m.dhr = m.tasks.empty() ? 0.0 : static_cast<double>(m.hits()) / static_cast<double>(m.tasks.size());
  return m;
}

std::vector<CycleMetrics> replay(const std::vector<CycleAllocation>& allocations, double deadline,
                                 const NetworkModel& network) {
  std::vector<CycleMetrics> out;
  out.reserve(allocations.size());
  for (const auto& a : allocations) out.push_back(execute_allocation(a, deadline, network));
  return out;
}

// --- top-down baseline ------------------------------------------------------

std::pair<int, double> top_down_objective(const TopDownProblem& p, const std::vector<int>& device_of,
                                          const std::vector<int>& order) {
  std::vector<double> load(p.predicted_compute.size(), 0.0);
  int misses = 0;
  double total = 0.0;
  std::vector<char> seen(device_of.size(), 0);
  for (int t : order) {
    seen[static_cast<std::size_t>(t)] = 1;
    const int d = device_of[static_cast<std::size_t>(t)];
    if (d == kNone) {
      ++misses;
      continue;
    }
    const auto di = static_cast<std::size_t>(d), ti = static_cast<std::size_t>(t);
    const double finish = load[di] + p.predicted_compute[di][ti];
    const double delay = finish + p.predicted_transfer[di][ti];
    load[di] = finish;
    total += delay;
    misses += delay > p.deadline ? 1 : 0;
  }
  for (std::size_t t = 0; t < device_of.size(); ++t) {
    if (!seen[t]) ++misses;  // tasks missing from the order are never run
  }
  return {misses, total};
}

TopDownResult top_down_exhaustive(const TopDownProblem& p) {
  const std::size_t devices = p.predicted_compute.size();
  const std::size_t tasks = devices ? p.predicted_compute[0].size() : 0;
  TopDownResult best;
  best.order.resize(tasks);
  std::iota(best.order.begin(), best.order.end(), 0);
  best.device_of.assign(tasks, kNone);
  std::tie(best.predicted_misses, best.predicted_delay) =
      top_down_objective(p, best.device_of, best.order);

  // Odometer over choices 0..devices, where `devices` means unassigned.
  std::vector<std::size_t> digit(tasks, 0);
  std::vector<int> device_of(tasks);
  while (true) {
    for (std::size_t t = 0; t < tasks; ++t) {
      device_of[t] = digit[t] == devices ? kNone : static_cast<int>(digit[t]);
    }
    const auto [misses, delay] = top_down_objective(p, device_of, best.order);
    if (misses < best.predicted_misses ||
        (misses == best.predicted_misses && delay < best.predicted_delay)) {
      best.device_of = device_of;
      best.predicted_misses = misses;
      best.predicted_delay = delay;
    }
    std::size_t k = 0;
    while (k < tasks && ++digit[k] > devices) digit[k++] = 0;
    if (k == tasks) break;
  }
  return best;
}

TopDownResult top_down_greedy(const TopDownProblem& p) {
  const std::size_t devices = p.predicted_compute.size();
  const std::size_t tasks = devices ? p.predicted_compute[0].size() : 0;
  TopDownResult r;
  r.device_of.assign(tasks, kNone);
  std::vector<double> load(devices, 0.0);
  std::vector<char> done(tasks, 0);
  while (true) {
    int pick_task = kNone, pick_device = kNone;
    double pick_regret = -1.0;
    for (std::size_t t = 0; t < tasks; ++t) {
      if (done[t]) continue;
      double best = kInf, second = kInf;
      int best_device = kNone;
      for (std::size_t d = 0; d < devices; ++d) {
        const double delay = load[d] + p.predicted_compute[d][t] + p.predicted_transfer[d][t];
        if (!(delay <= p.deadline)) continue;
        if (delay < best) {
          second = best;
          best = delay;
          best_device = static_cast<int>(d);
        } else if (delay < second) {
          second = delay;
        }
      }
      if (best_device == kNone) continue;
      const double regret = second - best;  // +inf with a single candidate
      if (regret > pick_regret) {
        pick_regret = regret;
        pick_task = static_cast<int>(t);
        pick_device = best_device;
      }
    }
    if (pick_task == kNone) break;
    const auto t = static_cast<std::size_t>(pick_task);
    const auto d = static_cast<std::size_t>(pick_device);
    done[t] = 1;
    r.device_of[t] = pick_device;
    r.order.push_back(pick_task);
    load[d] += p.predicted_compute[d][t];
  }
  for (std::size_t t = 0; t < tasks; ++t) {
    if (!done[t]) r.order.push_back(static_cast<int>(t));
  }
  std::tie(r.predicted_misses, r.predicted_delay) = top_down_objective(p, r.device_of, r.order);
  return r;
}

// --- simulator --------------------------------------------------------------

namespace {

// Collects one group's messages so they can be forwarded in group order after
// the parallel section.
class BufferSink : public dpfp::MessageSink {
 public:
  void on_broadcast(const dpfp::ServerBroadcast& msg) override { messages_.emplace_back(msg); }
  void on_claim(const dpfp::ClaimMessage& msg) override { messages_.emplace_back(msg); }

  void flush(dpfp::MessageSink& out) const {
    for (const auto& m : messages_) {
      if (const auto* b = std::get_if<dpfp::ServerBroadcast>(&m)) {
        out.on_broadcast(*b);
      } else {
        out.on_claim(std::get<dpfp::ClaimMessage>(m));
      }
    }
  }

 private:
  std::vector<std::variant<dpfp::ServerBroadcast, dpfp::ClaimMessage>> messages_;
};

struct GroupOutcome {
  NegotiationStats stats;
  BufferSink messages;
  std::vector<double> congestion;  // per slot, gpata only
};

struct GroupSetup {
  const ScenarioConfig* config = nullptr;
  const CycleInputs* inputs = nullptr;
  const std::vector<Task>* tasks = nullptr;  // admitted, with rewards
  Scheme scheme = Scheme::kGpata;
  std::size_t server = 0;
  GroupGame group;
  ExecutionPolicy policy = ExecutionPolicy::kSerial;
  bool log_messages = false;
};

int pick_max_reward(const game::GameInstance& g, std::size_t j) {
  int best = kNone;
  for (std::size_t i = 0; i < g.tasks(); ++i) {
    if (!g.feasible[j][i]) continue;
    if (best == kNone || g.rewards[i] > g.rewards[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

void allocate_top_down(const GroupSetup& s, std::vector<Decision>& decisions) {
  const auto& cfg = *s.config;
  const auto& in = *s.inputs;
  const auto& tasks = *s.tasks;
  const auto& g = s.group;
  TopDownProblem p;
  p.deadline = cfg.deadline;
  const Point server = cfg.servers[s.server].location;
  for (std::size_t d : g.devices) {
    // Worst-case beliefs regardless of the configured estimation mode.
    const auto worst = privacy::estimate_conservative(in.views[d], server);
    std::vector<double> comp, trans;
    for (std::size_t t : g.tasks) {
      comp.push_back(compute_time(tasks[t].comp_complexity, worst.freq, worst.usage));
      trans.push_back(cfg.network.transfer_time(tasks[t].output_volume, worst.distance));
    }
    p.predicted_compute.push_back(std::move(comp));
    p.predicted_transfer.push_back(std::move(trans));
  }
  if (g.devices.empty()) return;
  const auto exhaustive = static_cast<long long>(g.devices.size() * g.tasks.size()) <=
                          cfg.tda_exhaustive_bound;
  const TopDownResult r = exhaustive ? top_down_exhaustive(p) : top_down_greedy(p);

  std::vector<double> committed;
  for (std::size_t d : g.devices) committed.push_back(in.states[d].utilization);
  std::vector<int> counter(g.devices.size(), 0);
  for (int local_task : r.order) {
    const int local_device = r.device_of[static_cast<std::size_t>(local_task)];
    if (local_device == kNone) continue;
    const auto li = static_cast<std::size_t>(local_device);
    const std::size_t d = g.devices[li];
    const std::size_t t = g.tasks[static_cast<std::size_t>(local_task)];
    const auto& state = in.states[d];
    const double c = compute_time(tasks[t].comp_complexity, state.cpu_freq, state.cpu_usage);
    auto& dec = decisions[t];
    dec.device = state.id;
    dec.round = 0;
    dec.claim_order = counter[li]++;
    dec.feasible_at_claim = game::fits_deadline(c, state.cpu_usage + committed[li], cfg.deadline);
    committed[li] += c / cfg.deadline;
  }
}

GroupOutcome allocate_group(const GroupSetup& s, std::vector<double> congestion,
                            std::vector<Decision>& decisions) {
  GroupOutcome out;
  const auto& cfg = *s.config;
  const auto& in = *s.inputs;
  const auto& tasks = *s.tasks;
  const auto& g = s.group;
  out.congestion = std::move(congestion);
  if (g.tasks.empty()) return out;
  if (s.scheme == Scheme::kTda) {
    allocate_top_down(s, decisions);
    return out;
  }
  if (g.devices.empty()) return out;

  const std::size_t nd = g.devices.size();
  std::vector<double> committed(nd), scores(nd, 1.0);
  std::vector<std::vector<double>> compute(nd), energy(nd);
  for (std::size_t j = 0; j < nd; ++j) {
    const std::size_t d = g.devices[j];
    const auto& state = in.states[d];
    committed[j] = state.utilization;
    if (s.scheme == Scheme::kGpata) {
      scores[j] = game::quality_score(
          {in.capacity[d].freq, in.capacity[d].usage, in.estimated_distance[d]}, cfg.lambda1,
          cfg.lambda2);
    }
    for (std::size_t t : g.tasks) {
      const double c = compute_time(tasks[t].comp_complexity, state.cpu_freq, state.cpu_usage);
      const double tr = cfg.network.transfer_time(tasks[t].output_volume, in.server_distance[d]);
      const double rate = tr > 0.0 ? tasks[t].output_volume / tr : 0.0;
      compute[j].push_back(c);
      energy[j].push_back(std::max(edge_cost(state, c, tr, rate), kMinEnergy));
    }
  }

  const int cap = cfg.claim_round_cap.value_or(static_cast<int>(g.tasks.size()));
  std::vector<char> assigned(g.tasks.size(), 0);
  std::vector<int> counter(nd, 0);
  for (int round = 0; round < cap; ++round) {
    std::vector<std::size_t> residual;  // positions in g.tasks
    for (std::size_t k = 0; k < g.tasks.size(); ++k) {
      if (!assigned[k]) residual.push_back(k);
    }
    if (residual.empty()) break;

    game::GameInstance game;
    for (std::size_t k : residual) game.rewards.push_back(tasks[g.tasks[k]].reward);
    game.scores = scores;
    game.energy.assign(nd, {});
    game.feasible.assign(nd, {});
    for (std::size_t j = 0; j < nd; ++j) {
      const auto& state = in.states[g.devices[j]];
      for (std::size_t k : residual) {
        game.energy[j].push_back(s.scheme == Scheme::kCog ? 1.0 : energy[j][k]);
        game.feasible[j].push_back(
            game::fits_deadline(compute[j][k], state.cpu_usage + committed[j], cfg.deadline) ? 1
                                                                                             : 0);
      }
    }

    const std::uint64_t stream =
        Rng::derive(cfg.seed, "allocation", u64(in.cycle), u64(cfg.servers[s.server].id),
                    u64(round), u64(static_cast<int>(s.scheme)))
            .next();
    std::vector<int> winners(residual.size(), kNone);
    switch (s.scheme) {
      case Scheme::kGpata:
      case Scheme::kBgta:
      case Scheme::kCog: {
        const bool gpata = s.scheme == Scheme::kGpata;
        dpfp::NegotiationParams params;
        params.decay = cfg.mu;
        params.inertia = cfg.rho;
        params.max_iterations = gpata ? cfg.negotiation_bound : cfg.bgta_iteration_cap;
        params.policy = s.policy;
        dpfp::NegotiationContext ctx;
        ctx.stream_seed = stream;
        ctx.cycle = in.cycle;
        ctx.server = cfg.servers[s.server].id;
        ctx.round = round;
        for (std::size_t k : residual) ctx.task_ids.push_back(tasks[g.tasks[k]].id);
        for (std::size_t d : g.devices) ctx.device_ids.push_back(in.states[d].id);
        ctx.sink = gpata && s.log_messages ? &out.messages : nullptr;
        dpfp::CongestionState initial;
        if (gpata) {
          initial.decay = cfg.mu;
          for (std::size_t k : residual) initial.rates.push_back(out.congestion[k]);
        }
        const auto result = dpfp::negotiate(game, initial, params, ctx);
        if (gpata) {
          for (std::size_t r = 0; r < residual.size(); ++r) {
            out.congestion[residual[r]] = result.congestion.rates[r];
          }
        }
        winners = result.winners;
        ++out.stats.negotiations;
        out.stats.converged += result.converged ? 1 : 0;
        out.stats.iterations += result.iterations;
        out.stats.max_iterations = std::max(out.stats.max_iterations, result.iterations);
        break;
      }
      case Scheme::kGmxr: {
        game::StrategyProfile claims(nd);
        for (std::size_t j = 0; j < nd; ++j) claims[j] = pick_max_reward(game, j);
        const auto claimed = game::claimants(claims, residual.size());
        for (std::size_t r = 0; r < residual.size(); ++r) {
          if (claimed[r].empty()) continue;
          const std::vector<double> equal(claimed[r].size(), 1.0);
          Rng rng = Rng::derive(stream, "tiebreak", r);
          winners[r] = claimed[r][game::tie_break(equal, rng)];
        }
        break;
      }
      case Scheme::kRandom: {
        Rng rng(stream);
        std::vector<char> busy(nd, 0);
        for (std::size_t r = 0; r < residual.size(); ++r) {
          std::vector<int> candidates;
          for (std::size_t j = 0; j < nd; ++j) {
            if (!busy[j] && game.feasible[j][r]) candidates.push_back(static_cast<int>(j));
          }
          if (candidates.empty()) continue;
          const int j = candidates[rng.below(candidates.size())];
          busy[static_cast<std::size_t>(j)] = 1;
          winners[r] = j;
        }
        break;
      }
      case Scheme::kTda:
        break;
    }

    bool any = false;
    for (std::size_t r = 0; r < residual.size(); ++r) {
      if (winners[r] == kNone) continue;
      any = true;
      const auto j = static_cast<std::size_t>(winners[r]);
      const std::size_t k = residual[r];
      assigned[k] = 1;
      auto& dec = decisions[g.tasks[k]];
      dec.device = in.states[g.devices[j]].id;
      dec.round = round;
      dec.claim_order = counter[j]++;
      dec.feasible_at_claim = game.feasible[j][r] != 0;
      committed[j] += compute[j][k] / cfg.deadline;
    }
    if (!any) break;
  }
  return out;
}

dra::RewardWeights initial_weights(const ScenarioConfig& c) {
  dra::RewardWeights w;
  w.eta = c.eta;
  w.budget = c.initial_budget;
  w.beta = c.beta;
  w.thres_high = c.thres_high;
  w.shed_fraction = c.shed_fraction;
  w.pairing = c.loss_pairing;
  return w;
}

}  // namespace

Simulator::Simulator(ScenarioConfig config, Scheme scheme, SimulatorOptions options)
    : config_(std::move(config)), scheme_(scheme), options_(options) {
  validate(config_);
  weights_ = initial_weights(config_);
  admitted_limit_ = config_.tasks.per_cycle;
}

CycleResult Simulator::step() {
  if (done()) throw std::logic_error("Simulator::step: all cycles already executed");
  const int cycle = next_cycle_++;
  const CycleInputs in = prepare_cycle(config_, cycle, options_.policy);

  CycleResult result;
  const std::size_t admitted =
      std::min(in.generated.size(), static_cast<std::size_t>(std::max(admitted_limit_, 0)));
  std::vector<Task> tasks(in.generated.begin(), in.generated.begin() + static_cast<long>(admitted));

  const bool controlled = scheme_ == Scheme::kGpata;
  const dra::RewardWeights reward_weights = controlled ? weights_ : initial_weights(config_);

  const std::size_t servers = config_.servers.size();
  std::vector<GroupGame> groups(servers);
  for (std::size_t s = 0; s < servers; ++s) groups[s].devices = in.groups.groups[s];
  for (std::size_t t = 0; t < tasks.size(); ++t) groups[t % servers].tasks.push_back(t);

  std::size_t with_tasks = 0;
  for (const auto& g : groups) with_tasks += g.tasks.empty() ? 0 : 1;
  for (const auto& g : groups) {
    if (g.tasks.empty()) continue;
    std::vector<Task> local;
    for (std::size_t t : g.tasks) local.push_back(tasks[t]);
    const auto rewards = dra::compute_rewards(local, reward_weights,
                                              reward_weights.budget / static_cast<double>(with_tasks));
    for (std::size_t k = 0; k < g.tasks.size(); ++k) tasks[g.tasks[k]].reward = rewards[k];
  }

  std::vector<Decision> decisions(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) decisions[t].task = tasks[t].id;

  std::vector<std::vector<double>> history(servers);
  for (std::size_t s = 0; s < servers; ++s) {
    for (std::size_t k = 0; k < groups[s].tasks.size(); ++k) {
      const auto it = congestion_.find({s, k});
      history[s].push_back(it == congestion_.end() ? game::kScoreFloor : it->second);
    }
  }

  std::vector<GroupOutcome> outcomes(servers);
  // Groups run concurrently; the negotiation inside each stays serial so the
  // device sweep is not nested inside the group loop.
  const ExecutionPolicy inner =
      options_.policy == ExecutionPolicy::kParallel && servers > 1 ? ExecutionPolicy::kSerial
                                                                   : options_.policy;
  for_each_index(servers, options_.policy, [&](std::size_t s) {
    GroupSetup setup;
    setup.config = &config_;
    setup.inputs = &in;
    setup.tasks = &tasks;
    setup.scheme = scheme_;
    setup.server = s;
    setup.group = groups[s];
    setup.policy = inner;
    setup.log_messages = options_.sink != nullptr;
    outcomes[s] = allocate_group(setup, history[s], decisions);
  });

  for (std::size_t s = 0; s < servers; ++s) {
    auto& o = outcomes[s];
    if (options_.sink) o.messages.flush(*options_.sink);
    result.negotiation.negotiations += o.stats.negotiations;
    result.negotiation.converged += o.stats.converged;
    result.negotiation.iterations += o.stats.iterations;
    result.negotiation.max_iterations =
        std::max(result.negotiation.max_iterations, o.stats.max_iterations);
    if (scheme_ == Scheme::kGpata) {
      for (std::size_t k = 0; k < o.congestion.size(); ++k) congestion_[{s, k}] = o.congestion[k];
    }
  }

  auto& alloc = result.allocation;
  alloc.cycle = cycle;
  alloc.tasks = tasks;
  alloc.states = in.states;
  alloc.server_distance = in.server_distance;
  alloc.decisions = std::move(decisions);
  result.metrics = execute_allocation(alloc, config_.deadline, config_.network);
  result.assignment_trace = in.groups.trace;

  auto& trace = result.controller;
  trace.cycle = cycle;
  trace.alpha1 = reward_weights.alpha1;
  trace.alpha2 = reward_weights.alpha2;
  trace.budget = reward_weights.budget;
  trace.admitted = static_cast<int>(tasks.size());
  trace.misses = static_cast<int>(tasks.size()) - result.metrics.hits();

  if (controlled) {
    std::vector<int> missed;
    missed.reserve(tasks.size());
    for (const auto& r : result.metrics.tasks) missed.push_back(r.deadline_hit ? 0 : 1);
    dra::Losses losses;
    weights_ = dra::update_weights(weights_, tasks, missed, &losses);
    const bool literal = weights_.pairing == dra::LossPairing::kLiteral;
    trace.loss1 = literal ? losses.transfer : losses.compute;
    trace.loss2 = literal ? losses.compute : losses.transfer;
    const auto budget = dra::update_budget(weights_, trace.misses, trace.admitted);
    weights_ = budget.weights;
    trace.admission_control = budget.admission_control;
    if (budget.admission_control) {
      admitted_limit_ = dra::shed_admission(admitted_limit_, weights_.shed_fraction);
    }
  }
  return result;
}

RunSummary summarize(const std::vector<CycleMetrics>& cycles, std::size_t device_count,
                     Scheme scheme, std::uint64_t seed) {
  RunSummary s;
  s.scheme = scheme;
  s.seed = seed;
  s.cycles = static_cast<int>(cycles.size());
  double delay_sum = 0.0, payoff_sum = 0.0;
  long long executed = 0;
  for (const auto& m : cycles) {
    for (const auto& r : m.tasks) {
      ++s.tasks;
      s.hits += r.deadline_hit ? 1 : 0;
      if (r.device_id != kNone && std::isfinite(r.e2e_delay)) {
        delay_sum += r.e2e_delay;
        ++executed;
      }
    }
    for (const auto& d : m.devices) {
      payoff_sum += d.payoff;
      s.total_energy += d.energy_cost;
    }
  }
  s.dhr = s.tasks ? static_cast<double>(s.hits) / static_cast<double>(s.tasks) : 0.0;
  s.mean_e2e_delay = executed ? delay_sum / static_cast<double>(executed) : 0.0;
  s.mean_device_payoff = device_count ? payoff_sum / static_cast<double>(device_count) : 0.0;
  return s;
}

RunResult run_scheme(const ScenarioConfig& config, Scheme scheme, SimulatorOptions options) {
  Simulator sim(config, scheme, options);
  RunResult out;
  out.cycles.reserve(static_cast<std::size_t>(config.cycles));
  while (!sim.done()) out.cycles.push_back(sim.step());
  std::vector<CycleMetrics> metrics;
  metrics.reserve(out.cycles.size());
  long long negotiations = 0, converged = 0, iterations = 0;
  for (const auto& c : out.cycles) {
    metrics.push_back(c.metrics);
    negotiations += c.negotiation.negotiations;
    converged += c.negotiation.converged;
    iterations += c.negotiation.iterations;
  }
  out.summary = summarize(metrics, config.devices.size(), scheme, config.seed);
  if (negotiations > 0) {
    out.summary.mean_iterations = static_cast<double>(iterations) / static_cast<double>(negotiations);
    out.summary.converged_fraction =
        static_cast<double>(converged) / static_cast<double>(negotiations);
  }
  return out;
}

}  // namespace gpata::engine
