#include "gpata/ulb.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gpata::ulb {

double ulb_distance(const privacy::DisclosedView& view, const privacy::Estimates& capacity,
                    Point server) {
  const double spare = capacity.freq * (1.0 - capacity.usage);
  if (!(spare > 0.0)) return std::numeric_limits<double>::infinity();
  return privacy::expected_distance(view.location, server) / spare;
}

DistanceMatrix distance_matrix(std::span<const privacy::DisclosedView> views,
                               std::span<const privacy::Estimates> capacity,
                               std::span<const EdgeServer> servers, ExecutionPolicy policy) {
  if (views.size() != capacity.size()) {
    throw std::invalid_argument("distance_matrix: one capacity estimate per view required");
  }
  DistanceMatrix m;
  m.devices = views.size();
  m.servers = servers.size();
  m.values.assign(m.devices * m.servers, 0.0);
  for_each_index(m.devices, policy, [&](std::size_t d) {
    for (std::size_t s = 0; s < m.servers; ++s) {
      m.values[d * m.servers + s] = ulb_distance(views[d], capacity[d], servers[s].location);
    }
  });
  return m;
}

namespace {

Assignment empty_assignment(const DistanceMatrix& m) {
  if (m.servers == 0) throw std::invalid_argument("balance: at least one server required");
  Assignment a;
  a.server_of.assign(m.devices, 0);
  a.groups.resize(m.servers);
  a.trace.reserve(m.devices);
  return a;
}

}  // namespace

Assignment balance(const DistanceMatrix& m, ExecutionPolicy policy) {
  Assignment a = empty_assignment(m);
  std::vector<std::vector<std::size_t>> order(m.servers);
  for_each_index(m.servers, policy, [&](std::size_t s) {
    auto& list = order[s];
    list.resize(m.devices);
    std::iota(list.begin(), list.end(), std::size_t{0});
    std::sort(list.begin(), list.end(), [&](std::size_t x, std::size_t y) {
      const double dx = m.at(x, s), dy = m.at(y, s);
      if (dx != dy) return dx < dy;
      return x < y;
    });
  });

  std::vector<char> taken(m.devices, 0);
  std::vector<std::size_t> cursor(m.servers, 0);
  std::size_t remaining = m.devices;
  while (remaining > 0) {
    for (std::size_t s = 0; s < m.servers && remaining > 0; ++s) {
      auto& c = cursor[s];
      while (taken[order[s][c]]) ++c;
      const std::size_t d = order[s][c];
      taken[d] = 1;
      --remaining;
      a.server_of[d] = s;
      a.groups[s].push_back(d);
      a.trace.push_back({s, d, m.at(d, s)});
    }
  }
  return a;
}

Assignment balance_reference(const DistanceMatrix& m) {
  Assignment a = empty_assignment(m);
  std::vector<char> taken(m.devices, 0);
  std::size_t remaining = m.devices;
  while (remaining > 0) {
    for (std::size_t s = 0; s < m.servers && remaining > 0; ++s) {
      std::size_t best = m.devices;
      for (std::size_t d = 0; d < m.devices; ++d) {
        if (taken[d]) continue;
        if (best == m.devices || m.at(d, s) < m.at(best, s)) best = d;
      }
      taken[best] = 1;
      --remaining;
      a.server_of[best] = s;
      a.groups[s].push_back(best);
      a.trace.push_back({s, best, m.at(best, s)});
    }
  }
  return a;
}

}  // namespace gpata::ulb
