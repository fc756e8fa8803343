#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gpata/rng.hpp"
#include "gpata/ulb.hpp"

using namespace gpata;
using namespace gpata::ulb;

namespace {

privacy::DisclosedView view_of(std::vector<Point> points, std::vector<double> weights = {}) {
  privacy::DisclosedView v;
  v.location.points = std::move(points);
  v.location.weights = std::move(weights);
  return v;
}

DistanceMatrix random_matrix(Rng& rng, std::size_t devices, std::size_t servers, bool ties) {
  DistanceMatrix m;
  m.devices = devices;
  m.servers = servers;
  for (std::size_t k = 0; k < devices * servers; ++k) {
    // Coarse values force ties; occasional infinities model saturated devices.
    double v = ties ? static_cast<double>(rng.below(4)) : rng.uniform(0.0, 10.0);
    if (rng.bernoulli(0.05)) v = std::numeric_limits<double>::infinity();
    m.values.push_back(v);
  }
  return m;
}

void check_same(const Assignment& a, const Assignment& b) {
  CHECK(a.server_of == b.server_of);
  CHECK(a.groups == b.groups);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].server == b.trace[k].server);
    CHECK(a.trace[k].device == b.trace[k].device);
  }
}

}  // namespace

TEST_CASE("distance metric") {
  // Singleton at distance 2 with spare compute 2 * 0.5.
  CHECK(ulb_distance(view_of({{2, 0}}), {2.0, 0.5, 0.0}, {0, 0}) == doctest::Approx(2.0));
  // Two equally likely POIs at distances 1 and 3.
  CHECK(ulb_distance(view_of({{1, 0}, {0, 3}}), {1.0, 0.0, 0.0}, {0, 0}) == doctest::Approx(2.0));
  // Weighted POIs 0.9 at distance 1 and 0.1 at distance 11.
  CHECK(ulb_distance(view_of({{1, 0}, {11, 0}}, {0.9, 0.1}), {1.0, 0.0, 0.0}, {0, 0}) ==
        doctest::Approx(2.0));
  CHECK(std::isinf(ulb_distance(view_of({{1, 0}}), {2.0, 1.0, 0.0}, {0, 0})));
  CHECK(std::isinf(ulb_distance(view_of({{1, 0}}), {0.0, 0.2, 0.0}, {0, 0})));
}

TEST_CASE("round robin group sizes") {
  Rng rng(1);
  auto m = random_matrix(rng, 4, 2, false);
  auto a = balance(m, ExecutionPolicy::kSerial);
  CHECK(a.groups[0].size() == 2);
  CHECK(a.groups[1].size() == 2);

  m = random_matrix(rng, 7, 1, false);
  a = balance(m, ExecutionPolicy::kSerial);
  CHECK(a.groups[0].size() == 7);

  m = random_matrix(rng, 0, 3, false);
  a = balance(m, ExecutionPolicy::kSerial);
  CHECK(a.trace.empty());

  m.servers = 0;
  CHECK_THROWS(balance(m, ExecutionPolicy::kSerial));
}

TEST_CASE("each pick is the argmin of the remaining devices") {
  Rng rng(15);
  for (int rep = 0; rep < 300; ++rep) {
    const auto servers = 1 + rng.below(5);
    const auto devices = rng.below(40);
    const auto m = random_matrix(rng, devices, servers, rep % 2 == 0);
    const auto fast = balance(m, ExecutionPolicy::kSerial);
    const auto par = balance(m, ExecutionPolicy::kParallel);
    const auto ref = balance_reference(m);
    check_same(fast, ref);
    check_same(par, ref);

    // Direct oracle on the trace.
    std::vector<char> taken(devices, 0);
    for (std::size_t k = 0; k < fast.trace.size(); ++k) {
      const auto& p = fast.trace[k];
      CHECK(p.server == k % servers);
      for (std::size_t d = 0; d < devices; ++d) {
        if (taken[d]) continue;
        CHECK(m.at(p.device, p.server) <= m.at(d, p.server));
        if (m.at(d, p.server) == m.at(p.device, p.server)) CHECK(p.device <= d);
      }
      taken[p.device] = 1;
    }
    std::size_t lo = devices, hi = 0;
    for (const auto& g : fast.groups) {
      lo = std::min(lo, g.size());
      hi = std::max(hi, g.size());
    }
    if (devices > 0) CHECK(hi - lo <= 1);
  }
}

TEST_CASE("changing one device's column leaves earlier picks alone") {
  Rng rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    auto m = random_matrix(rng, 12, 3, false);
    const auto before = balance(m, ExecutionPolicy::kSerial);
    // Inflate the distances of the device picked last.
    const auto victim = before.trace.back().device;
    for (std::size_t s = 0; s < m.servers; ++s) m.values[victim * m.servers + s] *= 3.0;
    const auto after = balance(m, ExecutionPolicy::kSerial);
    for (std::size_t k = 0; k + 1 < before.trace.size(); ++k) {
      CHECK(after.trace[k].device == before.trace[k].device);
    }
  }
}

TEST_CASE("distance matrix matches the metric and both policies agree") {
  Rng rng(21);
  std::vector<privacy::DisclosedView> views;
  std::vector<privacy::Estimates> caps;
  std::vector<EdgeServer> servers{{0, {0, 0}, {}}, {1, {5, 5}, {}}, {2, {-3, 4}, {}}};
  for (int d = 0; d < 200; ++d) {
    std::vector<Point> pts;
    const auto n = 1 + rng.below(4);
    for (std::size_t k = 0; k < n; ++k) pts.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
    views.push_back(view_of(pts));
    caps.push_back({rng.uniform(0.5, 4.0), rng.uniform(0.0, 1.0), 0.0});
  }
  const auto serial = distance_matrix(views, caps, servers, ExecutionPolicy::kSerial);
  const auto parallel = distance_matrix(views, caps, servers, ExecutionPolicy::kParallel);
  CHECK(serial.values == parallel.values);
  for (std::size_t d = 0; d < views.size(); ++d) {
    for (std::size_t s = 0; s < servers.size(); ++s) {
      double mean = 0.0;
      for (const auto& p : views[d].location.points) mean += distance(p, servers[s].location);
      mean /= static_cast<double>(views[d].location.points.size());
      CHECK(serial.at(d, s) == doctest::Approx(mean / (caps[d].freq * (1 - caps[d].usage))));
    }
  }
}
