#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gpata/model.hpp"
#include "gpata/privacy.hpp"
#include "gpata/rng.hpp"

namespace gpata::game {

// Scores are clamped to this floor so that tie-break probabilities stay
// well-defined when the weighted quality goes negative.
inline constexpr double kScoreFloor = 1e-6;

double quality_score(const privacy::Estimates& estimates, double lambda1, double lambda2);

// Probability of each claimant winning: score / sum of scores.
std::vector<double> tie_break_probabilities(std::span<const double> scores);

// Returns the index into `scores` of the winning claimant.
std::size_t tie_break(std::span<const double> scores, Rng& rng);

// Worst-case execution time of a task on a device with the given frequency
// and background usage.
double wcet(const Task& task, double freq, double usage);

// EDF schedulability: wcet / deadline + load <= 1.
bool fits_deadline(double wcet_s, double load, double deadline);

// Single-task form: the usage estimate is both the slowdown and the load.
bool feasible(const Task& task, double freq, double usage, double deadline);

// Individual payoff of a claimant: reward * score / (energy * claimant score
// sum) when feasible, else 0. Throws on non-positive energy for a feasible
// claim.
double payoff(double reward, double score, double claimant_score_sum, double energy,
              bool is_feasible);

// Local indices: devices 0..D-1, tasks 0..T-1. A strategy entry is a task
// index or kNone.
using StrategyProfile = std::vector<int>;

// Everything needed to price any strategy profile of one local game.
struct GameInstance {
  std::vector<double> rewards;             // per task
  std::vector<double> scores;              // per device
  std::vector<std::vector<double>> energy; // [device][task], joules
  std::vector<std::vector<std::uint8_t>> feasible;  // [device][task]

  std::size_t devices() const { return scores.size(); }
  std::size_t tasks() const { return rewards.size(); }
  void validate() const;
};

// claimants[t] lists the devices claiming task t in increasing id order.
std::vector<std::vector<int>> claimants(const StrategyProfile& profile, std::size_t tasks);

// Sum of claimant scores per task.
std::vector<double> claimant_score_sums(const GameInstance& game, const StrategyProfile& profile);

double device_payoff(const GameInstance& game, const StrategyProfile& profile, int device,
                     std::span<const double> score_sums);

// True iff no device can strictly raise its payoff by switching its single
// claim (to another task or to no claim) while every other claim stays put.
bool verify_equilibrium(const GameInstance& game, const StrategyProfile& profile);

}  // namespace gpata::game
