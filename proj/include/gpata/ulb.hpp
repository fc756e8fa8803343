#pragma once

#include <span>
#include <vector>

#include "gpata/model.hpp"
#include "gpata/parallel.hpp"
#include "gpata/privacy.hpp"

namespace gpata::ulb {

// Expected distance to the server over the location region, divided by the
// estimated spare compute f * (1 - u). +inf when no spare compute is
// estimated, which sorts such devices last.
double ulb_distance(const privacy::DisclosedView& view, const privacy::Estimates& capacity,
                    Point server);

// Row-major [device][server].
struct DistanceMatrix {
  std::size_t devices = 0;
  std::size_t servers = 0;
  std::vector<double> values;

  double at(std::size_t device, std::size_t server) const {
    return values[device * servers + server];
  }
};

// capacity[d] supplies the frequency and usage estimates of device d.
DistanceMatrix distance_matrix(std::span<const privacy::DisclosedView> views,
                               std::span<const privacy::Estimates> capacity,
                               std::span<const EdgeServer> servers, ExecutionPolicy policy);

struct Pick {
  std::size_t server = 0;  // server index
  std::size_t device = 0;  // device index
  double distance = 0.0;
};

struct Assignment {
  std::vector<std::size_t> server_of;           // per device index
  std::vector<std::vector<std::size_t>> groups;  // per server index, in pick order
  std::vector<Pick> trace;                       // every pick in order
};

// Servers take turns in index order; on its turn a server takes the remaining
// device with the smallest distance (lowest index on ties). Each server sorts
// its column once and skips devices already taken, so the cost is
// O(Y * X log X) for sorting plus O(X * Y) for the turns.
Assignment balance(const DistanceMatrix& matrix, ExecutionPolicy policy);

// Same rule with an exhaustive scan per pick, O(X^2). Kept as the reference
// the fast path is tested against.
Assignment balance_reference(const DistanceMatrix& matrix);

}  // namespace gpata::ulb
