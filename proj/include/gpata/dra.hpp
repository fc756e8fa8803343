#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gpata/model.hpp"

namespace gpata::dra {

// Which complexity feeds which weight's loss. kLiteral follows the printed
// pairing: the transfer-complexity loss updates alpha1 (the compute weight).
enum class LossPairing { kLiteral, kSwapped };

struct RewardWeights {
  double alpha1 = 1.0;  // weight of computation complexity
  double alpha2 = 1.0;  // weight of transmission complexity
  double eta = 0.1;     // learning rate
  double budget = 100.0;
  double beta = 1.2;    // budget multiplier on high miss counts
  std::optional<int> thres_high;  // miss-count threshold; default ceil(0.2 * I)
  double shed_fraction = 0.1;     // admission-control cut on an all-miss cycle
  LossPairing pairing = LossPairing::kLiteral;
};

void validate(const RewardWeights& w);

int effective_threshold(const RewardWeights& w, int task_count);

// Rewards proportional to the weighted complexity mix, normalized so they sum
// to `budget`. All-zero complexities split the budget uniformly.
std::vector<double> compute_rewards(std::span<const Task> tasks, const RewardWeights& w,
                                    double budget);

struct Losses {
  double transfer = 0.0;  // mean O^t over misses - mean O^t over hits
  double compute = 0.0;   // same with O^c
  bool applied = false;   // false when every task hit or every task missed
};

Losses losses(std::span<const Task> tasks, std::span<const int> missed);

// Exponential-weights step followed by renormalization to alpha1+alpha2 = 2.
RewardWeights update_weights(const RewardWeights& w, std::span<const Task> tasks,
                             std::span<const int> missed, Losses* out = nullptr);

struct BudgetUpdate {
  RewardWeights weights;
  bool admission_control = false;  // every task missed
};

BudgetUpdate update_budget(const RewardWeights& w, int misses, int task_count);

// Admitted task count after an all-miss cycle: reduced by the shed fraction,
// at least by one task and never below one.
int shed_admission(int admitted, double shed_fraction);

}  // namespace gpata::dra
