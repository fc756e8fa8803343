#include "gpata/dra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gpata::dra {

void validate(const RewardWeights& w) {
  if (!(w.alpha1 > 0.0 && w.alpha2 > 0.0)) throw std::invalid_argument("alpha weights must be > 0");
  if (!(w.budget >= 0.0)) throw std::invalid_argument("budget must be >= 0");
  if (!(w.beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (!(w.eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
  if (w.thres_high && *w.thres_high < 0) throw std::invalid_argument("thres_high must be >= 0");
  if (!(w.shed_fraction >= 0.0 && w.shed_fraction < 1.0)) {
    throw std::invalid_argument("shed_fraction must lie in [0,1)");
  }
}

int effective_threshold(const RewardWeights& w, int task_count) {
  if (w.thres_high) return *w.thres_high;
  return static_cast<int>(std::ceil(0.2 * task_count));
}

std::vector<double> compute_rewards(std::span<const Task> tasks, const RewardWeights& w,
                                    double budget) {
  validate(w);
  if (tasks.empty()) return {};
  const double total_weight = w.alpha1 + w.alpha2;
  std::vector<double> raw;
  raw.reserve(tasks.size());
  double sum = 0.0;
  for (const auto& t : tasks) {
    const double r = w.alpha1 / total_weight * t.comp_complexity +
                     w.alpha2 / total_weight * t.trans_complexity;
    raw.push_back(r);
    sum += r;
  }
  if (!(sum > 0.0)) {
    return std::vector<double>(tasks.size(), budget / static_cast<double>(tasks.size()));
  }
  for (double& r : raw) r = budget * r / sum;
  return raw;
}

Losses losses(std::span<const Task> tasks, std::span<const int> missed) {
  if (missed.size() != tasks.size()) {
    throw std::invalid_argument("losses: one miss indicator per task required");
  }
  Losses out;
  double miss_t = 0.0, hit_t = 0.0, miss_c = 0.0, hit_c = 0.0;
  int misses = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (missed[i]) {
      miss_t += tasks[i].trans_complexity;
      miss_c += tasks[i].comp_complexity;
      ++misses;
    } else {
      hit_t += tasks[i].trans_complexity;
      hit_c += tasks[i].comp_complexity;
    }
  }
  const int hits = static_cast<int>(tasks.size()) - misses;
  if (misses == 0 || hits == 0) return out;
  out.transfer = miss_t / misses - hit_t / hits;
  out.compute = miss_c / misses - hit_c / hits;
  out.applied = true;
  return out;
}

RewardWeights update_weights(const RewardWeights& w, std::span<const Task> tasks,
                             std::span<const int> missed, Losses* out) {
  validate(w);
  const Losses l = losses(tasks, missed);
  if (out) *out = l;
  if (!l.applied) return w;
  const bool literal = w.pairing == LossPairing::kLiteral;
  const double loss1 = literal ? l.transfer : l.compute;
  const double loss2 = literal ? l.compute : l.transfer;
  RewardWeights next = w;
  // Work in log space so a long run of large losses cannot underflow a weight
  // to zero before renormalization.
  const double log1 = std::log(w.alpha1) - w.eta * loss1;
  const double log2 = std::log(w.alpha2) - w.eta * loss2;
  const double pivot = std::max(log1, log2);
  const double a1 = std::exp(log1 - pivot);
  const double a2 = std::exp(log2 - pivot);
  next.alpha1 = 2.0 * a1 / (a1 + a2);
  next.alpha2 = 2.0 * a2 / (a1 + a2);
  // Keep both weights strictly positive even at extreme loss ratios.
  constexpr double kMinWeight = 1e-300;
  next.alpha1 = std::max(next.alpha1, kMinWeight);
  next.alpha2 = std::max(next.alpha2, kMinWeight);
  return next;
}

BudgetUpdate update_budget(const RewardWeights& w, int misses, int task_count) {
  BudgetUpdate out{w, false};
  if (task_count <= 0) return out;
  if (misses >= effective_threshold(w, task_count)) out.weights.budget = w.budget * w.beta;
  out.admission_control = task_count > 0 && misses == task_count;
  return out;
}

int shed_admission(int admitted, double shed_fraction) {
  const int cut = std::max(1, static_cast<int>(std::floor(admitted * shed_fraction)));
  return std::max(1, admitted - cut);
}

}  // namespace gpata::dra
