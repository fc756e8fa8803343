#include "gpata/game.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace gpata::game {

double quality_score(const privacy::Estimates& e, double lambda1, double lambda2) {
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw std::invalid_argument("quality weights must be >= 0");
  }
  const double raw = lambda1 * e.freq * (1.0 - e.usage) - lambda2 * e.distance;
  return std::max(raw, kScoreFloor);
}

std::vector<double> tie_break_probabilities(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("tie_break: empty claimant set");
  double total = 0.0;
  for (double q : scores) {
    if (!(q > 0.0)) throw std::invalid_argument("tie_break: scores must be positive");
    total += q;
  }
  std::vector<double> p;
  p.reserve(scores.size());
  for (double q : scores) p.push_back(q / total);
  return p;
}

std::size_t tie_break(std::span<const double> scores, Rng& rng) {
  if (scores.empty()) throw std::invalid_argument("tie_break: empty claimant set");
  if (scores.size() == 1) return 0;
  for (double q : scores) {
    if (!(q > 0.0)) throw std::invalid_argument("tie_break: scores must be positive");
  }
  return rng.weighted_index(scores);
}

double wcet(const Task& task, double freq, double usage) {
  return compute_time(task.comp_complexity, freq, usage);
}

bool fits_deadline(double wcet_s, double load, double deadline) {
  if (!(deadline > 0.0)) throw std::invalid_argument("deadline must be > 0");
  return wcet_s / deadline + load <= 1.0;
}

bool feasible(const Task& task, double freq, double usage, double deadline) {
  if (usage >= 1.0) return task.comp_complexity <= 0.0 && usage <= 1.0;
  return fits_deadline(wcet(task, freq, usage), usage, deadline);
}

double payoff(double reward, double score, double claimant_score_sum, double energy,
              bool is_feasible) {
  if (!is_feasible) return 0.0;
  if (!(energy > 0.0)) throw std::invalid_argument("payoff: energy cost must be > 0");
  if (!(score > 0.0) || claimant_score_sum < score) {
    throw std::invalid_argument("payoff: need 0 < score <= claimant score sum");
  }
  return reward * score / (energy * claimant_score_sum);
}

void GameInstance::validate() const {
  const std::size_t d = devices(), t = tasks();
  if (energy.size() != d || feasible.size() != d) {
    throw std::invalid_argument("GameInstance: per-device tables must have one row per device");
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (energy[j].size() != t || feasible[j].size() != t) {
      throw std::invalid_argument("GameInstance: row " + std::to_string(j) +
                                  " must have one entry per task");
    }
    if (!(scores[j] > 0.0)) throw std::invalid_argument("GameInstance: scores must be > 0");
  }
}

std::vector<std::vector<int>> claimants(const StrategyProfile& profile, std::size_t tasks) {
  std::vector<std::vector<int>> out(tasks);
  for (std::size_t j = 0; j < profile.size(); ++j) {
    if (profile[j] == kNone) continue;
    out.at(static_cast<std::size_t>(profile[j])).push_back(static_cast<int>(j));
  }
  return out;
}

std::vector<double> claimant_score_sums(const GameInstance& game, const StrategyProfile& profile) {
  std::vector<double> sums(game.tasks(), 0.0);
  for (std::size_t j = 0; j < profile.size(); ++j) {
    if (profile[j] != kNone) sums.at(static_cast<std::size_t>(profile[j])) += game.scores[j];
  }
  return sums;
}

double device_payoff(const GameInstance& game, const StrategyProfile& profile, int device,
                     std::span<const double> score_sums) {
  const auto j = static_cast<std::size_t>(device);
  const int task = profile[j];
  if (task == kNone) return 0.0;
  const auto i = static_cast<std::size_t>(task);
  return payoff(game.rewards[i], game.scores[j], score_sums[i], game.energy[j][i],
                game.feasible[j][i] != 0);
}

bool verify_equilibrium(const GameInstance& game, const StrategyProfile& profile) {
  game.validate();
  if (profile.size() != game.devices()) {
    throw std::invalid_argument("verify_equilibrium: profile size must equal device count");
  }
  const auto sums = claimant_score_sums(game, profile);
  for (std::size_t j = 0; j < game.devices(); ++j) {
    const double current = device_payoff(game, profile, static_cast<int>(j), sums);
    for (std::size_t i = 0; i < game.tasks(); ++i) {
      if (static_cast<int>(i) == profile[j] || !game.feasible[j][i]) continue;
      const double deviated = payoff(game.rewards[i], game.scores[j], sums[i] + game.scores[j],
                                     game.energy[j][i], true);
      // Relative slack absorbs rounding in the score sums.
      if (deviated > current * (1.0 + 1e-12) + 1e-300) return false;
    }
  }
  return true;
}

}  // namespace gpata::game
