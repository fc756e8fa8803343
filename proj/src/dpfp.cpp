#include "gpata/dpfp.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace gpata::dpfp {

CongestionState initial_congestion(std::size_t tasks, double decay) {
  return CongestionState{std::vector<double>(tasks, game::kScoreFloor), decay};
}

CongestionState update_congestion(const CongestionState& state, std::span<const double> actual) {
  if (actual.size() != state.rates.size()) {
    throw std::invalid_argument("update_congestion: one actual value per task required");
  }
  CongestionState next = state;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] < 0.0) throw std::invalid_argument("update_congestion: actual must be >= 0");
    next.rates[i] = state.decay * state.rates[i] + (1.0 - state.decay) * actual[i];
  }
  return next;
}

int best_response(std::span<const double> rewards, double score,
                  std::span<const double> energy, std::span<const std::uint8_t> feasible,
                  std::span<const double> congestion, int previous, double inertia, Rng& rng) {
  const std::size_t n = rewards.size();
  if (energy.size() != n || feasible.size() != n || congestion.size() != n) {
    throw std::invalid_argument("best_response: per-task inputs must have equal length");
  }
  if (!rng.bernoulli(inertia)) return previous;

  int best = kNone;
  double best_value = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!feasible[i]) continue;
    if (!(congestion[i] > 0.0)) {
      throw std::invalid_argument("best_response: congestion rates must be > 0");
    }
    const double value = rewards[i] * score / (energy[i] * congestion[i]);
    if (value > best_value) {
      best_value = value;
      best = static_cast<int>(i);
    }
  }
  return best;
}

nlohmann::json to_json(const ServerBroadcast& msg) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : msg.tasks) {
    tasks.push_back({{"task", t.task},
                     {"reward", t.reward},
                     {"congestion", t.congestion},
                     {"observed", t.observed}});
  }
  return {{"type", "broadcast"}, {"v", msg.version},       {"cycle", msg.cycle},
          {"server", msg.server}, {"round", msg.round},     {"iteration", msg.iteration},
          {"tasks", tasks},       {"converged", msg.converged}};
}

nlohmann::json to_json(const ClaimMessage& msg) {
  return {{"type", "claim"},         {"v", msg.version},   {"cycle", msg.cycle},
          {"server", msg.server},    {"round", msg.round}, {"iteration", msg.iteration},
          {"device", msg.device},    {"task", msg.task == kNone ? nlohmann::json(nullptr)
                                                            : nlohmann::json(msg.task)}};
}

bool audit_broadcast(const nlohmann::json& msg) {
  static const std::set<std::string> kTop = {"type",  "v",         "cycle", "server",
                                             "round", "iteration", "tasks", "converged"};
  static const std::set<std::string> kTask = {"task", "reward", "congestion", "observed"};
  if (!msg.is_object()) return false;
  for (const auto& [key, value] : msg.items()) {
    if (!kTop.contains(key)) return false;
  }
  for (const auto& key : kTop) {
    if (!msg.contains(key)) return false;
  }
  if (msg["type"] != "broadcast" || msg["v"] != kBroadcastSchemaVersion) return false;
  if (!msg["converged"].is_boolean() || !msg["tasks"].is_array()) return false;
  for (const char* key : {"cycle", "server", "round", "iteration"}) {
    if (!msg[key].is_number_integer()) return false;
  }
  for (const auto& task : msg["tasks"]) {
    if (!task.is_object() || task.size() != kTask.size()) return false;
    for (const auto& [key, value] : task.items()) {
      if (!kTask.contains(key)) return false;
      if (key == "task" ? !value.is_number_integer() : !value.is_number()) return false;
    }
  }
  return true;
}

bool audit_broadcast(const ServerBroadcast& msg) { return audit_broadcast(to_json(msg)); }

void validate(const NegotiationParams& p) {
  if (!(p.decay > 0.0 && p.decay <= 1.0)) throw std::invalid_argument("mu must lie in (0,1]");
  if (!(p.inertia > 0.0 && p.inertia <= 1.0)) throw std::invalid_argument("rho must lie in (0,1]");
  if (p.max_iterations < 1) throw std::invalid_argument("P must be >= 1");
}

bool has_profitable_deviation(const game::GameInstance& game,
                              const game::StrategyProfile& profile,
                              std::span<const double> score_sums, std::size_t j) {
  const double current = game::device_payoff(game, profile, static_cast<int>(j), score_sums);
  for (std::size_t i = 0; i < game.tasks(); ++i) {
    if (static_cast<int>(i) == profile[j] || !game.feasible[j][i]) continue;
    const double moved = game::payoff(game.rewards[i], game.scores[j],
                                      score_sums[i] + game.scores[j], game.energy[j][i], true);
    if (moved > current * (1.0 + 1e-12) + 1e-300) return true;
  }
  return false;
}

namespace {

ServerBroadcast make_broadcast(const game::GameInstance& game, const NegotiationContext& ctx,
                               int iteration, const CongestionState& congestion,
                               std::span<const double> observed, bool converged) {
  ServerBroadcast msg;
  msg.cycle = ctx.cycle;
  msg.server = ctx.server;
  msg.round = ctx.round;
  msg.iteration = iteration;
  msg.converged = converged;
  msg.tasks.reserve(game.tasks());
  for (std::size_t i = 0; i < game.tasks(); ++i) {
    const TaskId id = i < ctx.task_ids.size() ? ctx.task_ids[i] : static_cast<TaskId>(i);
    msg.tasks.push_back({id, game.rewards[i], congestion.rates[i], observed[i]});
  }
  return msg;
}

}  // namespace

NegotiationResult negotiate(const game::GameInstance& game, CongestionState congestion,
                            const NegotiationParams& params, const NegotiationContext& ctx) {
  validate(params);
  game.validate();
  const std::size_t devices = game.devices();
  const std::size_t tasks = game.tasks();
  if (congestion.rates.empty()) congestion = initial_congestion(tasks, params.decay);
  if (congestion.rates.size() != tasks) {
    throw std::invalid_argument("negotiate: congestion state must cover every task");
  }
  congestion.decay = params.decay;
  for (double& r : congestion.rates) r = std::max(r, game::kScoreFloor);

  NegotiationResult result;
  game::StrategyProfile previous(devices, kNone);
  game::StrategyProfile current(devices, kNone);
  std::vector<double> observed(tasks, 0.0);

  for (int iteration = 1; iteration <= params.max_iterations; ++iteration) {
    if (ctx.sink) {
      ctx.sink->on_broadcast(make_broadcast(game, ctx, iteration, congestion, observed, false));
    }

    // Every device reads the same broadcast snapshot and writes only its own
    // slot, so the serial and parallel sweeps agree exactly.
    for_each_index(devices, params.policy, [&](std::size_t j) {
      // A device prices a task it does not hold as if its own score were
      // added to the task's congestion.
      std::vector<double> effective(congestion.rates);
      for (std::size_t i = 0; i < tasks; ++i) {
        if (static_cast<int>(i) != previous[j]) effective[i] += game.scores[j];
      }
      Rng rng = Rng::derive(ctx.stream_seed, "inertia", j, static_cast<std::uint64_t>(iteration));
      // No strategy exists before the first iteration, so everyone responds.
      const double inertia = iteration == 1 ? 1.0 : params.inertia;
      current[j] = best_response(game.rewards, game.scores[j], game.energy[j], game.feasible[j],
                                 effective, previous[j], inertia, rng);
    });

    if (ctx.sink) {
      for (std::size_t j = 0; j < devices; ++j) {
        ClaimMessage claim;
        claim.cycle = ctx.cycle;
        claim.server = ctx.server;
        claim.round = ctx.round;
        claim.iteration = iteration;
        claim.device = j < ctx.device_ids.size() ? ctx.device_ids[j] : static_cast<DeviceId>(j);
        claim.task = current[j] == kNone ? kNone
                     : static_cast<std::size_t>(current[j]) < ctx.task_ids.size()
                         ? ctx.task_ids[static_cast<std::size_t>(current[j])]
                         : current[j];
        ctx.sink->on_claim(claim);
      }
    }

    observed = game::claimant_score_sums(game, current);
    bool settled = true;
    for (std::size_t j = 0; j < devices && settled; ++j) {
      settled = !has_profitable_deviation(game, current, observed, j);
    }
    const bool converged = iteration >= 2 && current == previous && settled;

    congestion = update_congestion(congestion, observed);
    for (double& r : congestion.rates) r = std::max(r, game::kScoreFloor);
    previous = current;
    result.iterations = iteration;
    result.converged = converged;
    if (converged) break;
  }

  if (ctx.sink) {
    ctx.sink->on_broadcast(
        make_broadcast(game, ctx, result.iterations, congestion, observed, result.converged));
  }

  result.profile = current;
  result.congestion = congestion;
  result.winners.assign(tasks, kNone);
  const auto claimed = game::claimants(current, tasks);
  for (std::size_t i = 0; i < tasks; ++i) {
    const auto& who = claimed[i];
    if (who.empty()) continue;
    std::vector<double> scores;
    scores.reserve(who.size());
    for (int j : who) scores.push_back(game.scores[static_cast<std::size_t>(j)]);
    Rng rng = Rng::derive(ctx.stream_seed, "tiebreak", i);
    result.winners[i] = who[game::tie_break(scores, rng)];
  }
  return result;
}

}  // namespace gpata::dpfp
